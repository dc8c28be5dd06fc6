#include "harmony/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "harmony/error.hpp"
#include "harmony/rng.hpp"

namespace harmony {

namespace {

// Consonant-vowel syllables without e, y, l, s, t, c or n: the stemmer
// leaves these words alone and none of them is a stopword.
constexpr std::string_view kConsonants = "bdgkmprvz";
constexpr std::string_view kVowels = "aiou";

class WordSource {
 public:
  explicit WordSource(std::uint64_t seed) : rng_(seed) {}

  std::string fresh() {
    for (;;) {
      std::string w;
      for (int i = 0; i < 3; ++i) {
        w += kConsonants[rng_.uniform_index(kConsonants.size())];
        w += kVowels[rng_.uniform_index(kVowels.size())];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> fresh(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(fresh());
    return out;
  }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%04zu", prefix, i + 1);
  return buf;
}

struct Concept {
  std::vector<std::string> label;
  std::size_t topic = 0;
  std::vector<std::string> rule;
};

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.n_sources == 0 || spec.n_targets == 0)
    throw Error(ErrorCode::InvalidArgument, "synthetic corpus needs sources and targets");
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "noise must lie in [0, 1]");
  const auto n_multi = static_cast<std::size_t>(static_cast<double>(spec.n_sources) * spec.multi_gold_fraction);
  if (spec.n_sources + n_multi > spec.n_targets)
    throw Error(ErrorCode::InvalidArgument, "not enough targets for one gold target per source");

  WordSource words(derive_seed(spec.seed, 1));
  Rng rng(derive_seed(spec.seed, 2));

  const std::size_t n_topics = std::max<std::size_t>(1, spec.n_targets / 10);
  std::vector<std::vector<std::string>> topics;
  for (std::size_t t = 0; t < n_topics; ++t) topics.push_back(words.fresh(2));

  std::vector<Concept> concepts;
  for (std::size_t i = 0; i < spec.n_targets; ++i)
    concepts.push_back({words.fresh(3), i % n_topics, words.fresh(2)});

  // Gold assignment: the first n_sources drawn targets are primary golds;
  // the next n_multi become near-duplicates of the first n_multi primaries.
  auto drawn = rng.permutation(spec.n_targets);
  drawn.resize(spec.n_sources + n_multi);
  for (std::size_t m = 0; m < n_multi; ++m) {
    auto& twin = concepts[drawn[spec.n_sources + m]];
    const auto& original = concepts[drawn[m]];
    twin.label = original.label;
    twin.label.push_back(words.fresh());
    twin.topic = original.topic;
  }

  std::vector<VariableRecord> targets;
  for (std::size_t i = 0; i < spec.n_targets; ++i) {
    const auto& c = concepts[i];
    targets.push_back({numbered('T', i), join(c.label), join(topics[c.topic]),
                       "computed from " + join(c.rule), Side::target});
  }

  auto restate = [&](const std::vector<std::string>& original) {
    std::vector<std::string> out;
    for (const auto& w : original) out.push_back(rng.uniform01() < spec.noise ? words.fresh() : w);
    return out;
  };

  std::vector<VariableRecord> sources;
  std::vector<std::pair<std::string, std::string>> gold;
  for (std::size_t s = 0; s < spec.n_sources; ++s) {
    const auto target = drawn[s];
    const auto& c = concepts[target];
    const auto name = numbered('S', s);
    sources.push_back({name, join(restate(c.label)), join(restate(topics[c.topic])),
                       "computed from " + join(restate(c.rule)), Side::source});
    gold.emplace_back(name, targets[target].name);
    if (s < n_multi) gold.emplace_back(name, targets[drawn[spec.n_sources + s]].name);
  }

  return {DataDictionary(Side::source, std::move(sources), {"synthetic", "generated"}),
          DataDictionary(Side::target, std::move(targets), {"synthetic", "generated"}), GoldPairs(gold)};
}

PlantedFixture make_planted_fixture(const PlantedSpec& spec) {
  if (spec.n_sources == 0 || spec.n_targets < 2)
    throw Error(ErrorCode::InvalidArgument, "planted fixture needs sources and at least two targets");
  const auto schema = FeatureSchema::standard();
  const auto signal = schema.indices_of(spec.signal);
  const auto constant = schema.indices_of(spec.constant);
  std::vector<bool> is_signal(schema.size(), false), is_constant(schema.size(), false);
  for (auto c : signal) is_signal[c] = true;
  for (auto c : constant) is_constant[c] = true;

  Rng rng(spec.seed);
  std::vector<std::string> sources, targets;
  for (std::size_t s = 0; s < spec.n_sources; ++s) sources.push_back(numbered('S', s));
  for (std::size_t t = 0; t < spec.n_targets; ++t) targets.push_back(numbered('T', t));

  std::vector<FeatureMatrix> blocks;
  std::vector<std::pair<std::string, std::string>> gold;
  for (std::size_t s = 0; s < spec.n_sources; ++s) {
    const auto g = rng.uniform_index(spec.n_targets);
    gold.emplace_back(sources[s], targets[g]);
    FeatureMatrix block(static_cast<Eigen::Index>(spec.n_targets), static_cast<Eigen::Index>(schema.size()));
    for (std::size_t t = 0; t < spec.n_targets; ++t) {
      for (std::size_t c = 0; c < schema.size(); ++c) {
        double v = rng.uniform01();
        if (is_constant[c]) {
          v = 0.0;
        } else if (is_signal[c]) {
          v = t == g ? 0.7 + 0.3 * v : 0.5 * v;
        }
        block(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = v;
      }
    }
    blocks.push_back(std::move(block));
  }
  return {FeatureStore(schema, std::move(sources), std::move(targets), std::move(blocks)), GoldPairs(gold)};
}

double random_ranking_mrr(std::size_t n, std::size_t n_gold) {
  if (n_gold == 0 || n_gold > n) throw Error(ErrorCode::InvalidArgument, "n_gold must lie in [1, n]");
  // P(best = r) = C(n - r, g - 1) / C(n, g); accumulate the ratio in logs.
  const auto lchoose = [](double a, double b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  const double g = static_cast<double>(n_gold);
  const double total = lchoose(static_cast<double>(n), g);
  double expected = 0.0;
  for (std::size_t r = 1; r + n_gold - 1 <= n; ++r)
    expected += std::exp(lchoose(static_cast<double>(n - r), g - 1.0) - total) / static_cast<double>(r);
  return expected;
}

}  // namespace harmony

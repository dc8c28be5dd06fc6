// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "harmony/experiment.hpp"
#include "harmony/forest.hpp"
#include "harmony/fuzzy.hpp"
#include "harmony/io.hpp"
#include "harmony/rank_eval.hpp"
#include "harmony/stats.hpp"
#include "harmony/synthetic.hpp"
#include "corpus_util.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace harmony;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "failed: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- metrics
void metric_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int m = 0; m < 1000; ++m) {
    const auto rows = 1 + rng.uniform_index(50);
    const auto cols = 2 + rng.uniform_index(299);
    const auto levels = 2 + rng.uniform_index(40);  // few levels, many ties
    std::vector<double> fast, slow;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> scores(cols);
      std::vector<int> gold(cols, 0);
      for (auto& s : scores) s = static_cast<double>(rng.uniform_index(levels)) / static_cast<double>(levels);
      // engineered tie group around a gold entry
      const auto g = rng.uniform_index(cols);
      gold[g] = 1;
      for (std::size_t k = 0; k < 3 && k < cols; ++k) scores[rng.uniform_index(cols)] = scores[g];
      if (rng.uniform01() < 0.3) gold[rng.uniform_index(cols)] = 1;
      fast.push_back(best_gold_rank(scores, gold));
      slow.push_back(oracle::best_gold_rank(scores, gold));
    }
    for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
    for (double n : {5.0, 10.0, 15.0, 20.0, 30.0})
      worst = std::max(worst, std::abs(hit_ratio_from_ranks(fast, n) - oracle::hit_ratio(slow, n)));
    worst = std::max(worst, std::abs(mrr_from_ranks(fast) - oracle::mrr(slow)));
  }
  o.require(worst <= 1e-12, "max deviation from brute force");

  const std::vector<std::string> targets = {"a", "b", "c", "d", "e", "f", "g"};
  const std::vector<double> scores = {0.99, 0.98, 0.97, 0.5, 0.5, 0.5, 0.1};
  const auto list = rank_candidates("s", targets, scores, {"e"});
  o.require(list.best_gold_rank() == 5.0, "3-way tie at 4-6 gets rank 5");
  o.require(std::abs(reciprocal_rank(list) - 0.2) < 1e-15, "tie RR 0.2");
  const double secs = seconds_since(t0);
  o.require(secs < 30, "runtime under 30 s");
  o.detail << "1000 matrices, max |diff| " << worst << ", tie rank " << list.best_gold_rank() << ", "
           << io::fixed(secs, 2) << " s";
}

// ------------------------------------------------------------------ fuzzy
NormalizedText toks(const std::vector<std::string>& words) { return NormalizedText{words}; }

void fuzzy_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  Rng rng(7);
  auto random_string = [&](std::size_t max_len) {
    std::string s(rng.uniform_index(max_len + 1), 'a');
    for (auto& c : s) c = static_cast<char>('a' + rng.uniform_index(5));
    return s;
  };
  int lev_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_string(40), b = random_string(40);
    lev_bad += levenshtein(a, b) != oracle::levenshtein(a, b);
  }
  o.require(lev_bad == 0, "levenshtein equals DP oracle");

  const std::vector<std::string> vocab = {"blood", "pressur", "glucos", "fast", "bmi", "age", "weight"};
  auto random_tokens = [&] {
    std::vector<std::string> t(rng.uniform_index(6));
    for (auto& w : t) w = vocab[rng.uniform_index(vocab.size())];
    return t;
  };
  int prop_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = toks(random_tokens()), b = toks(random_tokens());
    const double ab = token_set_ratio(a, b).value, ba = token_set_ratio(b, a).value;
    prop_bad += ab != ba || ab < 0 || ab > 100;
    // same token set with duplicates and shuffled order
    auto dup = a.tokens;
    if (!dup.empty()) dup.push_back(dup.front());
    rng.shuffle(std::span<std::string>(dup));
    if (!a.tokens.empty()) prop_bad += token_set_ratio(a, toks(dup)).value != 100.0;
  }
  o.require(prop_bad == 0, "token_set_ratio symmetric, bounded, 100 on dedup-equal");

  const double r75 = indel_ratio("abcd", "bcde").value;
  const double r80 = token_set_ratio(toks({"a", "b", "c"}), toks({"a", "b", "d"})).value;
  const double r33 = token_sort_ratio(toks({"x", "y"}), toks({"y", "z"})).value;
  o.require(std::abs(r75 - 75) <= 0.01 && std::abs(r80 - 80) <= 0.01 && std::abs(r33 - 33.33) <= 0.01,
            "worked examples 75 / 80 / 33.33");
  const double secs = seconds_since(t0);
  o.require(secs < 10, "runtime under 10 s");
  o.detail << "levenshtein mismatches " << lev_bad << ", property violations " << prop_bad << ", examples "
           << io::fixed(r75, 2) << " " << io::fixed(r80, 2) << " " << io::fixed(r33, 2) << ", "
           << io::fixed(secs, 2) << " s";
}

// ----------------------------------------------------------------- forest
double accuracy(const ForestModel& m, const FeatureMatrix& x, const std::vector<int>& y) {
  const auto p = m.predict_proba(x);
  int ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += (p[static_cast<Eigen::Index>(i)] > 0.5) == (y[i] == 1);
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

void forest(Outcome& o) {
  const auto t0 = Clock::now();
  ForestParams exact;
  exact.n_trees = 1;
  exact.subsample_fraction = 1.0;
  exact.max_features = MaxFeatures::all;
  Rng rng(99);
  int fixtures = 0, mismatches = 0;
  while (fixtures < 500) {
    FeatureMatrix x;
    std::vector<int> y;
    oracle::small_fixture(rng, x, y);
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) continue;
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0u);
    const auto model = train_forest(x, y, exact, oracle::schema_of(x.cols()), 1);
    mismatches += !oracle::same_tree(*oracle::build_tree(x, y, all), model.trees().front());
    ++fixtures;
  }
  o.require(mismatches == 0, "forest equals exhaustive-split oracle");
  o.require(impurity(0, 4, Criterion::gini) == 0.0 && impurity(2, 2, Criterion::gini) == 0.5 &&
                impurity(3, 1, Criterion::gini) == 0.375,
            "gini 0 / 0.5 / 0.375");

  double worst = 1.0, total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng data(seed);
    FeatureMatrix x, xt;
    std::vector<int> y, yt;
    oracle::separable(data, 200, x, y);
    oracle::separable(data, 200, xt, yt);
    const auto model = train_forest(x, y, ForestParams{}, oracle::schema_of(2), seed);
    const double acc = accuracy(model, xt, yt);
    worst = std::min(worst, acc);
    total += acc;
  }
  o.require(worst >= 0.95, "separable test accuracy >= 0.95 for every seed");
  const double secs = seconds_since(t0);
  o.require(secs < 60, "runtime under 60 s");
  o.detail << fixtures << " oracle fixtures, " << mismatches << " mismatches; separable accuracy min "
           << io::fixed(worst, 3) << " mean " << io::fixed(total / 20, 3) << ", " << io::fixed(secs, 2) << " s";
}

// ------------------------------------------------------------ end to end
ExperimentConfig e2e_config(int n_trials, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.n_trials = n_trials;
  cfg.base_seed = seed;
  ForestParams a, b;
  a.n_trees = 50;
  b.n_trees = 50;
  b.max_depth = 10;
  cfg.grid = {a, b};
  return cfg;
}

void end_to_end(Outcome& o) {
  const auto t0 = Clock::now();
  SyntheticSpec spec;  // 60 sources, 300 targets, paraphrase noise 0.5
  spec.seed = 11;
  const auto noisy = synthetic_store(spec);
  const auto trials = run_trials(noisy.store, noisy.corpus.gold, e2e_config(10, 100));
  const auto base = best_baseline(trials);
  std::vector<double> rf, bl;
  for (const auto& t : trials) {
    rf.push_back(t.ensemble.mrr);
    bl.push_back(t.baselines.at(base).mrr);
  }
  const auto test = paired_t_test(rf, bl);
  o.require(test.mean_a >= test.mean_b, "ensemble MRR >= best baseline MRR");
  o.require(test.mean_diff > 0, "paired mean difference > 0");

  spec.noise = 0.0;
  const auto clean = synthetic_store(spec);
  const auto clean_trials = run_trials(clean.store, clean.corpus.gold, e2e_config(10, 200));
  double min_hr5 = 1.0;
  for (const auto& t : clean_trials) min_hr5 = std::min(min_hr5, t.ensemble.metric("HR-5"));
  o.require(min_hr5 == 1.0, "noise 0 gives HR-5 = 1 in every trial");
  const double secs = seconds_since(t0);
  o.require(secs < 300, "runtime under 5 min");
  o.detail << "ensemble MRR " << io::fixed(test.mean_a, 4) << " vs " << base << " " << io::fixed(test.mean_b, 4)
           << " (diff " << io::fixed(test.mean_diff, 4) << ", p " << io::general(test.p_value, 3)
           << "); noise-free min HR-5 " << min_hr5 << ", " << io::fixed(secs, 1) << " s";
}

// ------------------------------------------------------------ statistics
void statistics(Outcome& o) {
  const std::vector<double> a = {1, 2, 3, 4, 5}, b = {0, 2, 2, 4, 4};
  const auto hand = paired_t_test(a, b);
  o.require(std::abs(hand.t_stat - 2.449) < 1e-3 && hand.df == 4 && std::abs(hand.p_value - 0.0705) <= 0.002,
            "hand example");

  Rng rng(31);
  double worst_cdf = 0.0;
  int ci_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const double t = -5.0 + 10.0 * rng.uniform01();
    boost::math::students_t dist(49);
    worst_cdf = std::max(worst_cdf, std::abs(student_t_cdf(t, 49) - boost::math::cdf(dist, t)));

    std::vector<double> x(50), y(50);
    for (std::size_t k = 0; k < 50; ++k) {
      x[k] = rng.uniform01();
      y[k] = rng.uniform01() + 0.05 * (rng.uniform01() - 0.5);
    }
    const auto r = paired_t_test(x, y);
    const double p_ref = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_stat)));
    worst_cdf = std::max(worst_cdf, std::abs(r.p_value - p_ref));
    ci_ok += r.ci_low <= r.mean_diff && r.mean_diff <= r.ci_high;
  }
  o.require(worst_cdf <= 1e-6, "t CDF and p within 1e-6 of boost at df 49");
  o.require(ci_ok == 100, "CI contains mean diff 100/100");
  o.detail << "t " << io::fixed(hand.t_stat, 4) << " df " << hand.df << " p " << io::fixed(hand.p_value, 4)
           << "; max |cdf diff| " << worst_cdf << "; CI ok " << ci_ok << "/100";
}

// ------------------------------------------------------------ importance
void importance(Outcome& o) {
  PlantedSpec spec;
  spec.signal = {"MPNet_on_label"};
  spec.constant = {"Label_len_JP", "Derive_info_null_EU", "Derive_info_null_JP"};
  spec.seed = 41;
  const auto fx = make_planted_fixture(spec);
  auto cfg = quick_config(10, 500);
  const std::vector<std::string> metrics = {"HR-5", "HR-10", "MRR"};
  std::vector<FeatureImportance> per_trial;
  int nonzero_unused = 0, unused_checked = 0;
  run_trials(fx.store, fx.gold, cfg, nullptr, [&](const TrialArtifacts& t, bool) {
    Rng rng(derive_seed(t.result.seed, 5));
    auto imp = permutation_importance(t.model, t.test_pairs, metrics, rng);
    const auto used = t.model.used_features();
    for (std::size_t f = 0; f < imp.features.size(); ++f) {
      const bool constant = std::find(spec.constant.begin(), spec.constant.end(), imp.features[f]) != spec.constant.end();
      if (constant || !used.contains(f)) {
        ++unused_checked;
        nonzero_unused += (imp.importance.row(static_cast<Eigen::Index>(f)).array() != 0.0).any();
      }
    }
    per_trial.push_back(std::move(imp));
  });
  o.require(nonzero_unused == 0, "constant or never-split features score exactly 0");
  const auto rows = summarize_importance(per_trial);
  double signal_rank = 0;
  for (const auto& r : rows)
    if (r.feature == "MPNet_on_label" && r.metric == "MRR") signal_rank = r.mean_rank;
  o.require(signal_rank == 1.0, "planted feature mean MRR rank 1");
  o.detail << unused_checked << " constant/unused feature-trials all 0; planted feature mean rank " << signal_rank
           << " over " << per_trial.size() << " trials";
}

// --------------------------------------------------------------- ablation
void ablation_check(Outcome& o) {
  PlantedSpec spec;
  spec.n_sources = 200;
  spec.n_targets = 100;
  spec.signal = {"E5_on_label", "E5_on_sheet", "E5_on_label_key", "MPNet_on_label", "MPNet_on_sheet",
                 "MPNet_on_label_key", "MiniLM_on_label", "MiniLM_on_sheet", "MiniLM_on_label_key"};
  spec.seed = 77;
  const auto fx = make_planted_fixture(spec);
  auto cfg = quick_config(10, 900);
  cfg.grid[0].n_trees = 30;
  cfg.negatives_per_source = 50;
  const auto out = ablation(fx.store, fx.gold, cfg, std::vector<std::string>{"MRR"});
  const double chance = random_ranking_mrr(spec.n_targets, 1);
  double llm = -1, fuzzy = -1, other = -1, full = -1;
  for (const auto& r : out.rows) {
    full = r.full_mean;
    if (r.group == "LLM") llm = r.partial_mean;
    if (r.group == "Fuzzy") fuzzy = r.full_mean - r.partial_mean;
    if (r.group == "Other") other = r.full_mean - r.partial_mean;
  }
  o.require(std::abs(llm - chance) <= 0.05, "without the signal group MRR is within 0.05 of chance");
  o.require(std::abs(fuzzy) < 0.02 && std::abs(other) < 0.02, "dropping a noise group changes MRR by < 0.02");
  o.detail << "full MRR " << io::fixed(full, 4) << "; without LLM " << io::fixed(llm, 4) << " (chance "
           << io::fixed(chance, 4) << "); delta Fuzzy " << io::fixed(fuzzy, 4) << ", Other " << io::fixed(other, 4);
}

// ------------------------------------------------------------ determinism
int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(Outcome& o) {
  TempDir dir("accept-det");
  const std::string cli = "cd '" + dir.path().string() + "' && env -u HARMONY_EMBED_ENDPOINT '" + HARMONY_CLI + "' ";
  io::write_text_atomic(dir / "config.json", R"({"embedding": {"provider": "hash"},
    "experiment": {"grid": [{"n_trees": 30}, {"n_trees": 30, "max_depth": 8}], "negatives_per_source": 50}})");
  const std::string corpus = " --sources corpus/sources.csv --targets corpus/targets.csv --gold corpus/gold.csv";
  o.require(run(cli + "synth --out corpus --n-sources 30 --n-targets 90 --seed 3 2>/dev/null") == 0, "synth");
  for (const char* out : {"run1", "run2"})
    o.require(run(cli + "--config config.json trials --n 5 --seed 7 --out " + out + corpus + " 2>/dev/null") == 0,
              std::string("trials into ") + out);
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "run1")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir / "run1");
    const auto twin = dir / "run2" / rel;
    ++compared;
    if (!fs::exists(twin) || io::read_text(entry.path()) != io::read_text(twin)) {
      ++differing;
      o.detail << "differs: " << rel.string() << "; ";
    }
  }
  std::size_t second = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "run2")) second += entry.is_regular_file();
  o.require(compared > 0 && differing == 0 && second == compared, "byte-identical report files");
  o.detail << compared << " files compared, " << differing << " differ";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"metric oracle", metric_oracle},
      {"fuzzy oracle", fuzzy_oracle},
      {"forest", forest},
      {"end-to-end", end_to_end},
      {"statistics", statistics},
      {"permutation importance", importance},
      {"ablation", ablation_check},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail.str()
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

#include "harmony/features.hpp"

#include <algorithm>
#include <unordered_set>

#include "harmony/error.hpp"
#include "harmony/fuzzy.hpp"
#include "harmony/hashing.hpp"
#include "harmony/io.hpp"

namespace harmony {

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names_)
    if (!seen.insert(n).second) throw Error(ErrorCode::SchemaMismatch, "duplicate feature " + n);
}

FeatureSchema FeatureSchema::standard() {
  return FeatureSchema(std::vector<std::string>(kStandardFeatureNames.begin(), kStandardFeatureNames.end()));
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<std::size_t> FeatureSchema::indices_of(std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    auto idx = index_of(n);
    if (!idx) throw Error(ErrorCode::SchemaMismatch, "unknown feature " + n);
    out.push_back(*idx);
  }
  return out;
}

FeatureSchema FeatureSchema::select(std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (auto c : columns) names.push_back(names_.at(c));
  return FeatureSchema(std::move(names));
}

std::string FeatureSchema::hash() const {
  std::string joined;
  for (const auto& n : names_) {
    joined += n;
    joined.push_back('\n');
  }
  return to_hex(sha256(joined));
}

std::vector<PreparedVariable> prepare_variables(const DataDictionary& dict, EmbedderSet& embedders,
                                                KeywordProvider& keywords) {
  std::vector<PreparedVariable> out;
  out.reserve(dict.size());
  for (const auto& rec : dict) {
    PreparedVariable var;
    var.name = rec.name;
    var.texts = build_match_texts(rec, derive_keyword_text(rec.derivation_rule, keywords));
    var.fuzzy = {normalize_for_fuzzy(var.texts.label_text), normalize_for_fuzzy(var.texts.sheet_text),
                 normalize_for_fuzzy(var.texts.label_key_text)};
    var.label_words = word_count(rec.label);
    var.rule_words = word_count(rec.derivation_rule);
    var.rule_empty = rec.derivation_rule.empty();
    out.push_back(std::move(var));
  }
  if (out.empty()) return out;

  std::vector<std::string> texts;
  texts.reserve(out.size() * 3);
  for (const auto& v : out) {
    texts.push_back(v.texts.label_text);
    texts.push_back(v.texts.sheet_text);
    texts.push_back(v.texts.label_key_text);
  }
  EmbeddingCache scratch;
  EmbeddingCache& cache = embedders.cache ? *embedders.cache : scratch;
  for (std::size_t m = 0; m < embedders.slots.size(); ++m) {
    const auto& slot = embedders.slots[m];
    auto vectors = embed_batch(texts, slot.model_id, slot.provider, cache, embedders.batch_size);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t t = 0; t < 3; ++t) out[i].embedding[m][t] = std::move(vectors[3 * i + t].values);
  }
  return out;
}

FeatureVector build_pair_features(const PreparedVariable& src, const PreparedVariable& tgt) {
  FeatureVector f;
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t t = 0; t < 3; ++t) {
      const auto& a = src.embedding[m][t];
      const auto& b = tgt.embedding[m][t];
      if (a.size() != b.size())
        throw Error(ErrorCode::DimMismatch, "embedding dims differ for " + src.name + " / " + tgt.name);
      f[static_cast<Eigen::Index>(3 * m + t)] = cosine_similarity(a, b);
    }
  }
  for (std::size_t t = 0; t < 3; ++t)
    f[static_cast<Eigen::Index>(9 + t)] = token_set_ratio(src.fuzzy[t], tgt.fuzzy[t]).value / 100.0;
  f[12] = static_cast<double>(src.label_words);
  f[13] = static_cast<double>(tgt.label_words);
  f[14] = static_cast<double>(src.rule_words);
  f[15] = static_cast<double>(tgt.rule_words);
  f[16] = src.rule_empty ? 1.0 : 0.0;
  f[17] = tgt.rule_empty ? 1.0 : 0.0;
  return f;
}

FeatureStore::FeatureStore(FeatureSchema schema, std::vector<std::string> sources,
                           std::vector<std::string> targets, std::vector<FeatureMatrix> blocks)
    : schema_(std::move(schema)),
      sources_(std::move(sources)),
      targets_(std::move(targets)),
      blocks_(std::move(blocks)) {
  if (blocks_.size() != sources_.size())
    throw Error(ErrorCode::LengthMismatch, "one feature block per source required");
  for (const auto& b : blocks_) {
    if (static_cast<std::size_t>(b.rows()) != targets_.size() ||
        static_cast<std::size_t>(b.cols()) != schema_.size())
      throw Error(ErrorCode::SchemaMismatch, "feature block shape does not match store");
  }
  for (std::size_t i = 0; i < sources_.size(); ++i) source_index_.emplace(sources_[i], i);
  for (std::size_t i = 0; i < targets_.size(); ++i) target_index_.emplace(targets_[i], i);
}

std::optional<std::size_t> FeatureStore::source_index(std::string_view name) const {
  auto it = source_index_.find(std::string(name));
  if (it == source_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FeatureStore::target_index(std::string_view name) const {
  auto it = target_index_.find(std::string(name));
  if (it == target_index_.end()) return std::nullopt;
  return it->second;
}

FeatureStore FeatureStore::select_columns(std::span<const std::size_t> columns) const {
  std::vector<FeatureMatrix> blocks;
  blocks.reserve(blocks_.size());
  const std::vector<Eigen::Index> cols(columns.begin(), columns.end());
  for (const auto& b : blocks_) blocks.emplace_back(b(Eigen::all, cols));
  return FeatureStore(schema_.select(columns), sources_, targets_, std::move(blocks));
}

FeatureStore compute_feature_store(std::span<const PreparedVariable> sources,
                                   std::span<const PreparedVariable> targets) {
  std::vector<std::string> source_names, target_names;
  for (const auto& s : sources) source_names.push_back(s.name);
  for (const auto& t : targets) target_names.push_back(t.name);
  std::vector<FeatureMatrix> blocks;
  blocks.reserve(sources.size());
  for (const auto& s : sources) {
    FeatureMatrix block(static_cast<Eigen::Index>(targets.size()), kNumFeatures);
    for (std::size_t t = 0; t < targets.size(); ++t)
      block.row(static_cast<Eigen::Index>(t)) = build_pair_features(s, targets[t]).transpose();
    blocks.push_back(std::move(block));
  }
  return FeatureStore(FeatureSchema::standard(), std::move(source_names), std::move(target_names),
                      std::move(blocks));
}

GoldPairs::GoldPairs(std::span<const std::pair<std::string, std::string>> pairs) {
  for (const auto& p : pairs) {
    pairs_.insert(p);
    by_source_[p.first].insert(p.second);
  }
}

GoldPairs GoldPairs::from_table(const csv::Table& table, const DataDictionary& sources,
                                const DataDictionary& targets) {
  const auto s_col = table.column("source_var");
  const auto t_col = table.column("target_var");
  if (!s_col) throw Error(ErrorCode::MissingColumn, "source_var");
  if (!t_col) throw Error(ErrorCode::MissingColumn, "target_var");
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& row : table.rows) {
    const std::string s = *s_col < row.size() ? row[*s_col] : "";
    const std::string t = *t_col < row.size() ? row[*t_col] : "";
    if (!sources.contains(s)) throw Error(ErrorCode::UnknownVariable, "gold source " + s);
    if (!targets.contains(t)) throw Error(ErrorCode::UnknownVariable, "gold target " + t);
    pairs.emplace_back(s, t);
  }
  return GoldPairs(pairs);
}

GoldPairs GoldPairs::load(const std::filesystem::path& path, const DataDictionary& sources,
                          const DataDictionary& targets) {
  return from_table(csv::read_file(path), sources, targets);
}

csv::Table GoldPairs::to_table() const {
  csv::Table table;
  table.header = {"source_var", "target_var"};
  for (const auto& [s, t] : pairs_) table.rows.push_back({s, t});
  return table;
}

const std::set<std::string>& GoldPairs::targets_of(std::string_view source) const {
  static const std::set<std::string> none;
  auto it = by_source_.find(source);
  return it == by_source_.end() ? none : it->second;
}

bool GoldPairs::contains(std::string_view source, std::string_view target) const {
  return targets_of(source).contains(std::string(target));
}

std::vector<std::string> GoldPairs::sources_in(const FeatureStore& store) const {
  std::vector<std::string> out;
  for (const auto& s : store.sources()) {
    for (const auto& t : targets_of(s)) {
      if (store.target_index(t)) {
        out.push_back(s);
        break;
      }
    }
  }
  return out;
}

PairSet PairSet::select_columns(std::span<const std::size_t> columns) const {
  PairSet out;
  out.schema = schema.select(columns);
  out.source_idx = source_idx;
  out.target_idx = target_idx;
  const std::vector<Eigen::Index> cols(columns.begin(), columns.end());
  out.features = features(Eigen::all, cols);
  out.gold = gold;
  out.groups = groups;
  return out;
}

namespace {

std::size_t require_source(const FeatureStore& store, const std::string& name) {
  auto idx = store.source_index(name);
  if (!idx) throw Error(ErrorCode::UnknownSource, name);
  return *idx;
}

PairSet assemble(const FeatureStore& store,
                 const std::vector<std::pair<std::size_t, std::vector<std::pair<std::size_t, int>>>>& plan) {
  std::size_t total = 0;
  for (const auto& [s, rows] : plan) total += rows.size();
  PairSet out;
  out.schema = store.schema();
  out.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(store.schema().size()));
  out.gold.resize(static_cast<Eigen::Index>(total));
  out.source_idx.reserve(total);
  out.target_idx.reserve(total);
  std::size_t r = 0;
  for (const auto& [s, rows] : plan) {
    const std::size_t begin = r;
    const auto& block = store.block(s);
    for (const auto& [t, label] : rows) {
      out.features.row(static_cast<Eigen::Index>(r)) = block.row(static_cast<Eigen::Index>(t));
      out.gold[static_cast<Eigen::Index>(r)] = label;
      out.source_idx.push_back(s);
      out.target_idx.push_back(t);
      ++r;
    }
    out.groups.emplace_back(begin, r);
  }
  return out;
}

}  // namespace

PairSet generate_training_pairs(const FeatureStore& store, const GoldPairs& gold,
                                std::span<const std::string> train_sources,
                                std::size_t negatives_per_source, Rng& rng) {
  if (negatives_per_source < 1)
    throw Error(ErrorCode::InvalidArgument, "negatives_per_source must be >= 1");
  std::vector<std::pair<std::size_t, std::vector<std::pair<std::size_t, int>>>> plan;
  std::unordered_set<std::string> seen;
  for (const auto& name : train_sources) {
    const auto s = require_source(store, name);
    if (!seen.insert(name).second) throw Error(ErrorCode::InvalidArgument, "duplicate source " + name);
    const auto& gold_targets = gold.targets_of(name);
    std::vector<std::pair<std::size_t, int>> rows;
    std::vector<std::size_t> pool;
    for (std::size_t t = 0; t < store.n_targets(); ++t) {
      if (gold_targets.contains(store.targets()[t])) {
        rows.emplace_back(t, 1);
      } else {
        pool.push_back(t);
      }
    }
    if (rows.empty()) throw Error(ErrorCode::GoldMissing, "training source without gold target: " + name);
    for (auto t : rng.sample(std::move(pool), negatives_per_source)) rows.emplace_back(t, 0);
    plan.emplace_back(s, std::move(rows));
  }
  return assemble(store, plan);
}

PairSet generate_test_pairs(const FeatureStore& store, const GoldPairs& gold,
                            std::span<const std::string> test_sources,
                            std::span<const std::string> train_sources) {
  const std::unordered_set<std::string> train(train_sources.begin(), train_sources.end());
  std::vector<std::pair<std::size_t, std::vector<std::pair<std::size_t, int>>>> plan;
  std::unordered_set<std::string> seen;
  for (const auto& name : test_sources) {
    const auto s = require_source(store, name);
    if (train.contains(name)) throw Error(ErrorCode::Leakage, "source in both train and test: " + name);
    if (!seen.insert(name).second) throw Error(ErrorCode::InvalidArgument, "duplicate source " + name);
    const auto& gold_targets = gold.targets_of(name);
    std::vector<std::pair<std::size_t, int>> rows;
    rows.reserve(store.n_targets());
    for (std::size_t t = 0; t < store.n_targets(); ++t)
      rows.emplace_back(t, gold_targets.contains(store.targets()[t]) ? 1 : 0);
    plan.emplace_back(s, std::move(rows));
  }
  return assemble(store, plan);
}

csv::Table pair_set_table(const PairSet& pairs, const FeatureStore& store) {
  csv::Table table;
  table.header = {"source_name", "target_name"};
  for (const auto& n : pairs.schema.names()) table.header.push_back(n);
  table.header.push_back("gold");
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    std::vector<std::string> row = {store.sources()[pairs.source_idx[r]], store.targets()[pairs.target_idx[r]]};
    for (Eigen::Index c = 0; c < pairs.features.cols(); ++c)
      row.push_back(io::exact(pairs.features(static_cast<Eigen::Index>(r), c)));
    row.push_back(std::to_string(pairs.gold[static_cast<Eigen::Index>(r)]));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace harmony

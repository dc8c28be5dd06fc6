#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "harmony/csv.hpp"
#include "harmony/dictionary.hpp"
#include "harmony/embedding.hpp"
#include "harmony/rng.hpp"
#include "harmony/text_prep.hpp"

namespace harmony {

inline constexpr Eigen::Index kNumFeatures = 18;

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Slot order is versioned with the schema hash; never reorder.
inline constexpr std::array<std::string_view, kNumFeatures> kStandardFeatureNames = {
    "E5_on_label",         "E5_on_sheet",         "E5_on_label_key",
    "MPNet_on_label",      "MPNet_on_sheet",      "MPNet_on_label_key",
    "MiniLM_on_label",     "MiniLM_on_sheet",     "MiniLM_on_label_key",
    "Fuzzy_on_label",      "Fuzzy_on_sheet",      "Fuzzy_on_label_key",
    "Label_len_EU",        "Label_len_JP",        "Derive_info_len_EU",
    "Derive_info_len_JP",  "Derive_info_null_EU", "Derive_info_null_JP",
};

/// Ordered, named feature columns.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names);

  static FeatureSchema standard();

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Indices of `names`; throws SchemaMismatch for unknown names.
  std::vector<std::size_t> indices_of(std::span<const std::string> names) const;
  FeatureSchema select(std::span<const std::size_t> columns) const;
  /// Hex SHA-256 over the newline-joined names.
  std::string hash() const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<std::string> names_;
};

/// Embedding model ids filling the E5, MPNet and MiniLM slots, in that order.
inline const std::array<std::string, 3> kDefaultModelIds = {"e5-large-v2", "mpnet-base-all",
                                                            "minilm-l12-all"};

struct EmbedderSlot {
  std::string model_id;
  EmbeddingProvider* provider = nullptr;
};

struct EmbedderSet {
  std::array<EmbedderSlot, 3> slots;
  EmbeddingCache* cache = nullptr;
  std::size_t batch_size = 64;
};

/// Everything a variable contributes to its pair features.
struct PreparedVariable {
  std::string name;
  MatchTexts texts;
  std::array<NormalizedText, 3> fuzzy;                     // label, sheet, label_key
  std::array<std::array<Eigen::VectorXf, 3>, 3> embedding;  // [model][label, sheet, label_key]
  std::size_t label_words = 0;
  std::size_t rule_words = 0;
  bool rule_empty = true;
};

/// Builds match texts (keyword gate included), fuzzy tokens and embeddings
/// for every record. Embeddings are fetched per model in one batched call.
std::vector<PreparedVariable> prepare_variables(const DataDictionary& dict, EmbedderSet& embedders,
                                                KeywordProvider& keywords);

/// The 18 features for one (source, target) pair: per-model cosines on
/// label/sheet/label_key texts, token_set_ratio / 100 on the same texts,
/// word counts of labels and rules, and empty-rule flags.
FeatureVector build_pair_features(const PreparedVariable& src, const PreparedVariable& tgt);

/// Dense source x target feature blocks: block(s) has one row per target.
class FeatureStore {
 public:
  FeatureStore() = default;
  FeatureStore(FeatureSchema schema, std::vector<std::string> sources,
               std::vector<std::string> targets, std::vector<FeatureMatrix> blocks);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<std::string>& sources() const noexcept { return sources_; }
  const std::vector<std::string>& targets() const noexcept { return targets_; }
  std::size_t n_sources() const noexcept { return sources_.size(); }
  std::size_t n_targets() const noexcept { return targets_.size(); }
  const FeatureMatrix& block(std::size_t source) const { return blocks_.at(source); }

  std::optional<std::size_t> source_index(std::string_view name) const;
  std::optional<std::size_t> target_index(std::string_view name) const;

  FeatureStore select_columns(std::span<const std::size_t> columns) const;

 private:
  FeatureSchema schema_;
  std::vector<std::string> sources_;
  std::vector<std::string> targets_;
  std::vector<FeatureMatrix> blocks_;
  std::unordered_map<std::string, std::size_t> source_index_;
  std::unordered_map<std::string, std::size_t> target_index_;
};

FeatureStore compute_feature_store(std::span<const PreparedVariable> sources,
                                   std::span<const PreparedVariable> targets);

/// Manually matched (source, target) pairs. A source may have several targets.
class GoldPairs {
 public:
  GoldPairs() = default;
  explicit GoldPairs(std::span<const std::pair<std::string, std::string>> pairs);

  /// Columns source_var, target_var. Every name must exist in its dictionary.
  static GoldPairs from_table(const csv::Table& table, const DataDictionary& sources,
                              const DataDictionary& targets);
  static GoldPairs load(const std::filesystem::path& path, const DataDictionary& sources,
                        const DataDictionary& targets);
  csv::Table to_table() const;

  const std::set<std::string>& targets_of(std::string_view source) const;
  bool contains(std::string_view source, std::string_view target) const;
  bool has_source(std::string_view source) const { return by_source_.contains(std::string(source)); }
  std::size_t size() const noexcept { return pairs_.size(); }
  const std::set<std::pair<std::string, std::string>>& pairs() const noexcept { return pairs_; }

  /// Sources with at least one gold target present in `store`, in store order.
  std::vector<std::string> sources_in(const FeatureStore& store) const;

 private:
  std::set<std::pair<std::string, std::string>> pairs_;
  std::map<std::string, std::set<std::string>, std::less<>> by_source_;
};

/// Rows are grouped by source; `groups[g]` is the half-open row range of the
/// g-th source in `source_rows`.
struct PairSet {
  FeatureSchema schema;
  std::vector<std::size_t> source_idx;  // into FeatureStore::sources()
  std::vector<std::size_t> target_idx;  // into FeatureStore::targets()
  FeatureMatrix features;
  Eigen::VectorXi gold;
  std::vector<std::pair<std::size_t, std::size_t>> groups;

  std::size_t size() const noexcept { return source_idx.size(); }
  PairSet select_columns(std::span<const std::size_t> columns) const;
};

/// Per source: every gold pair as a positive, plus min(negatives, available)
/// distinct non-gold targets drawn without replacement.
PairSet generate_training_pairs(const FeatureStore& store, const GoldPairs& gold,
                                std::span<const std::string> train_sources,
                                std::size_t negatives_per_source, Rng& rng);

/// Per source: one row per target in the corpus. Throws Leakage when a test
/// source also appears in `train_sources`.
PairSet generate_test_pairs(const FeatureStore& store, const GoldPairs& gold,
                            std::span<const std::string> test_sources,
                            std::span<const std::string> train_sources = {});

/// source_name, target_name, one column per schema feature, gold.
csv::Table pair_set_table(const PairSet& pairs, const FeatureStore& store);

}  // namespace harmony

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "harmony/features.hpp"
#include "harmony/forest.hpp"
#include "harmony/rank_eval.hpp"
#include "harmony/stats.hpp"

#include "json.hpp"

namespace harmony {

/// A single-method baseline ranks targets by one feature column.
struct BaselineMethod {
  std::string name;
  std::string feature;
};

using FeatureGroups = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// LLM (9 embedding similarities), Fuzzy (3) and Other (6 metadata features).
FeatureGroups default_feature_groups();
std::vector<BaselineMethod> default_baselines();

struct ExperimentConfig {
  int n_trials = 50;
  std::uint64_t base_seed = 0;
  std::size_t negatives_per_source = 200;
  std::vector<ForestParams> grid = default_grid();
  std::size_t cv_folds = 5;
  double test_fraction = 0.2;
  std::vector<std::string> metrics = {"HR-5", "HR-10", "MRR"};  // importance metrics
  FeatureGroups feature_groups = default_feature_groups();
  std::vector<BaselineMethod> baselines = default_baselines();
  int permutation_repeats = 1;
  std::size_t ranked_top_k = 30;  // persisted per source besides gold rows

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Hex SHA-256 over the fields that change trial outcomes.
  std::string hash() const;
};

struct SourceSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Seeded shuffle, then round(|sources| * test_fraction) go to test.
SourceSplit split_sources(std::span<const std::string> sources, double test_fraction, std::uint64_t seed);

struct TrialResult {
  int trial_id = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> train_sources;
  std::vector<std::string> test_sources;
  ForestParams tuned_params;
  std::vector<double> cv_mrr;
  MetricReport ensemble;
  std::map<std::string, MetricReport> baselines;
  std::string model_ref;   // file name of the persisted model, when persisted
  std::string model_hash;
  std::string schema_hash;

  nlohmann::json to_json() const;
  static TrialResult from_json(const nlohmann::json& j);
};

/// In-memory products of a trial besides its result row.
struct TrialArtifacts {
  TrialResult result;
  ForestModel model;
  PairSet test_pairs;
  std::vector<RankedList> ranked;  // ensemble rankings of the test sources
};

/// One trial: 4:1 source split, down-sampled training pairs, grid search,
/// final forest on the full training set, then ensemble and baseline
/// rankings of every target for each test source.
TrialArtifacts run_trial(const FeatureStore& store, const GoldPairs& gold, const ExperimentConfig& config,
                         int trial_id, std::uint64_t seed);

/// Rankings for `sources` by an arbitrary per-block scorer.
std::vector<RankedList> rank_sources(const FeatureStore& store, const GoldPairs& gold,
                                     std::span<const std::string> sources,
                                     const std::function<Eigen::VectorXd(const FeatureMatrix&)>& scorer);

/// Per-trial files (trial_NNN.json, model_NNN.json, ranked_NNN.csv) under a
/// directory. A trial file written under a different config hash is ignored.
class TrialStore {
 public:
  explicit TrialStore(std::filesystem::path dir);

  std::optional<TrialResult> load(int trial_id, const std::string& config_hash) const;
  void save(const TrialArtifacts& trial, const std::string& config_hash, const FeatureStore& store,
            std::size_t ranked_top_k) const;
  ForestModel load_model(const TrialResult& result) const;
  std::vector<RankedList> load_ranked(int trial_id) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::filesystem::path trial_path(int trial_id) const;
  std::filesystem::path model_path(int trial_id) const;
  std::filesystem::path ranked_path(int trial_id) const;

 private:
  std::filesystem::path dir_;
};

using TrialCallback = std::function<void(const TrialArtifacts&, bool resumed)>;

/// Trials 1..n_trials with seeds base_seed + t. With a store, finished trials
/// are reloaded instead of recomputed; `on_trial` sees every trial in order
/// (resumed trials carry the reloaded model and regenerated test pairs).
std::vector<TrialResult> run_trials(const FeatureStore& store, const GoldPairs& gold,
                                    const ExperimentConfig& config, const TrialStore* trial_store = nullptr,
                                    const TrialCallback& on_trial = {});

/// Performance decline per feature (rows) and metric (columns) after one
/// global permutation of that feature's column across `test_pairs`,
/// averaged over `repeats`. Ranks are within-trial, 1 = most important,
/// average ranks for ties.
struct FeatureImportance {
  std::vector<std::string> features;
  std::vector<std::string> metrics;
  Eigen::MatrixXd importance;
  Eigen::MatrixXd rank;
};

FeatureImportance permutation_importance(const ForestModel& model, const PairSet& test_pairs,
                                         std::span<const std::string> metrics, Rng& rng, int repeats = 1);

struct ImportanceRow {
  std::string feature;
  std::string metric;
  double mean_importance = 0.0;
  double mean_rank = 0.0;
};

/// Averages per-trial importances and ranks; rows ordered by metric, then
/// by mean importance descending.
std::vector<ImportanceRow> summarize_importance(std::span<const FeatureImportance> trials);

struct AblationRow {
  std::string group;
  std::string metric;
  double full_mean = 0.0;
  double partial_mean = 0.0;
  TTestResult test;  // a = full model, b = partial model
};

/// Throws InvalidArgument unless `groups` partition `schema`.
void validate_partition(const FeatureSchema& schema, const FeatureGroups& groups);

struct AblationOutcome {
  std::vector<TrialResult> full;
  std::map<std::string, std::vector<TrialResult>> partial;  // by dropped group
  std::vector<AblationRow> rows;
};

/// Reruns every trial (same seeds, retuned and retrained) with each group's
/// columns removed and compares against the full model per metric.
AblationOutcome ablation(const FeatureStore& store, const GoldPairs& gold, const ExperimentConfig& config,
                         std::span<const std::string> metrics = {});

struct LowRankRow {
  std::string source;
  std::string gold_target;
  double rank = 0.0;
  std::string source_label;
  std::string target_label;
  std::vector<std::pair<std::string, double>> competitors;  // top non-gold entries
};

/// Every gold pair ranked strictly below `cutoff`, with the three best
/// non-gold competitors. Labels are looked up when dictionaries are given.
std::vector<LowRankRow> report_low_ranked(std::span<const RankedList> lists, double cutoff = 30.0,
                                          const DataDictionary* sources = nullptr,
                                          const DataDictionary* targets = nullptr);

// Report tables shaped like the usual results tables (rows = methods,
// features or groups; columns = metrics, deltas, intervals, p-values).
csv::Table trial_metrics_table(std::span<const TrialResult> trials);
csv::Table method_summary_table(std::span<const TrialResult> trials);
csv::Table comparison_table(std::span<const TrialResult> trials);
csv::Table coverage_table(std::span<const TrialResult> trials, std::span<const std::string> all_sources);
csv::Table importance_table(std::span<const ImportanceRow> rows);
csv::Table ablation_table(std::span<const AblationRow> rows);
csv::Table low_rank_table(std::span<const LowRankRow> rows);

/// Name of the baseline with the highest mean MRR across trials.
std::string best_baseline(std::span<const TrialResult> trials);

}  // namespace harmony

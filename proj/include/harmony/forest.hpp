#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "harmony/error.hpp"
#include "harmony/features.hpp"
#include "harmony/rng.hpp"

#include "json.hpp"

namespace harmony {

enum class Criterion { gini, entropy };
enum class MaxFeatures { sqrt, log2, all };

struct ForestParams {
  int n_trees = 100;
  std::optional<int> max_depth;  // nullopt = grow until pure or too small
  Criterion criterion = Criterion::gini;
  int min_samples_split = 2;
  MaxFeatures max_features = MaxFeatures::sqrt;
  double subsample_fraction = 0.8;

  void validate() const;
  /// Number of features drawn at each node for a schema of `n_features`.
  std::size_t features_per_node(std::size_t n_features) const;
  std::string describe() const;

  nlohmann::json to_json() const;
  static ForestParams from_json(const nlohmann::json& j);

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// n_trees {100, 300} x max_depth {none, 10, 20} x criterion {gini, entropy}
/// x min_samples_split {2, 5, 10} x max_features {sqrt, log2}.
std::vector<ForestParams> default_grid();
std::vector<ForestParams> grid_from_json(const nlohmann::json& j);

/// Node impurity of a two-class count. Gini: 1 - p^2 - q^2.
/// Entropy: -p log2 p - q log2 q with 0 log 0 = 0.
double impurity(std::size_t n_pos, std::size_t n_neg, Criterion criterion);

/// Smallest decrease treated as positive; guards against splits that only
/// exist through rounding.
inline constexpr double kMinImpurityDecrease = 1e-12;

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

/// Best split of `samples` over the candidate `features`. Thresholds are the
/// midpoints between consecutive distinct values; decrease is
/// I(parent) - nL/n I(left) - nR/n I(right). Ties go to the lowest feature
/// index, then the lowest threshold. Values <= threshold go left.
std::optional<Split> best_split(const FeatureMatrix& x, std::span<const int> y,
                                std::span<const std::size_t> samples,
                                std::span<const std::size_t> features, Criterion criterion);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::uint32_t n_pos = 0;  // training samples reaching the node
  std::uint32_t n_neg = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  double positive_fraction() const noexcept {
    return static_cast<double>(n_pos) / static_cast<double>(n_pos + n_neg);
  }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Flat node array; nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  template <typename Derived>
  const TreeNode& leaf(const Eigen::DenseBase<Derived>& x) const {
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf()) {
      node = &nodes[static_cast<std::size_t>(
          x(static_cast<Eigen::Index>(node->feature)) <= node->threshold ? node->left : node->right)];
    }
    return *node;
  }

  std::size_t depth() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

/// Grows one tree on `samples` with a fresh feature draw at every node.
DecisionTree grow_tree(const FeatureMatrix& x, std::span<const int> y,
                       std::span<const std::size_t> samples, const ForestParams& params, Rng& rng);

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<DecisionTree> trees, ForestParams params, FeatureSchema schema,
              std::uint64_t seed);

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const ForestParams& params() const noexcept { return params_; }
  const FeatureSchema& schema() const noexcept { return schema_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Mean over trees of the reached leaf's positive fraction.
  template <typename Derived>
  double predict_proba(const Eigen::DenseBase<Derived>& x) const {
    if (static_cast<std::size_t>(x.size()) != schema_.size())
      throw Error(ErrorCode::SchemaMismatch, "expected " + std::to_string(schema_.size()) +
                                                 " features, got " + std::to_string(x.size()));
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.leaf(x).positive_fraction();
    return sum / static_cast<double>(trees_.size());
  }

  Eigen::VectorXd predict_proba(const FeatureMatrix& rows) const;

  /// Features used by at least one split.
  std::set<std::size_t> used_features() const;

  nlohmann::json to_json() const;
  static ForestModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ForestModel load(const std::filesystem::path& path);
  /// Hex SHA-256 of the serialized model.
  std::string hash() const;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;

 private:
  std::vector<DecisionTree> trees_;
  ForestParams params_;
  FeatureSchema schema_;
  std::uint64_t seed_ = 0;
};

/// Tree t subsamples ceil(fraction * |rows|) of `rows` without replacement
/// using a seed derived from (seed, t). Empty `rows` means all rows.
ForestModel train_forest(const FeatureMatrix& x, std::span<const int> y, const ForestParams& params,
                         const FeatureSchema& schema, std::uint64_t seed,
                         std::span<const std::size_t> rows = {});
ForestModel train_forest(const PairSet& data, const ForestParams& params, std::uint64_t seed);

struct GridSearchResult {
  ForestParams best;
  std::size_t best_index = 0;
  std::vector<double> mean_mrr;  // one per grid entry
};

/// k-fold cross-validation over SOURCE groups of `train`. Each held-out
/// source's own rows are ranked by predicted probability; the config with
/// the highest mean fold MRR wins, earliest grid entry on ties.
GridSearchResult grid_search_cv(const PairSet& train, std::span<const ForestParams> grid,
                                std::size_t k, std::uint64_t seed);

/// Fold of each group in `train.groups` under grid_search_cv's assignment.
std::vector<std::size_t> assign_source_folds(std::size_t n_groups, std::size_t k, std::uint64_t seed);

}  // namespace harmony

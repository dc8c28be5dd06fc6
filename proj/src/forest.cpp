#include "harmony/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "harmony/hashing.hpp"
#include "harmony/io.hpp"
#include "harmony/rank_eval.hpp"

namespace harmony {

namespace {

std::string_view criterion_name(Criterion c) { return c == Criterion::gini ? "gini" : "entropy"; }

Criterion criterion_from(const std::string& s) {
  if (s == "gini") return Criterion::gini;
  if (s == "entropy") return Criterion::entropy;
  throw Error(ErrorCode::InvalidArgument, "criterion must be gini or entropy, got " + s);
}

std::string_view max_features_name(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::sqrt: return "sqrt";
    case MaxFeatures::log2: return "log2";
    case MaxFeatures::all: return "all";
  }
  return "all";
}

MaxFeatures max_features_from(const std::string& s) {
  if (s == "sqrt") return MaxFeatures::sqrt;
  if (s == "log2") return MaxFeatures::log2;
  if (s == "all") return MaxFeatures::all;
  throw Error(ErrorCode::InvalidArgument, "max_features must be sqrt, log2 or all, got " + s);
}

double midpoint(double lo, double hi) {
  double mid = lo / 2 + hi / 2;
  if (!(mid >= lo && mid < hi)) mid = lo;
  return mid;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const int> y, const ForestParams& params, Rng& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {
    all_features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    per_node_ = params.features_per_node(all_features_.size());
  }

  DecisionTree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    tree_.nodes.reserve(2 * samples_.size() / std::max(1, params_.min_samples_split) + 1);
    grow(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::size_t begin, std::size_t end, int depth) {
    TreeNode node;
    for (std::size_t i = begin; i < end; ++i) (y_[samples_[i]] ? node.n_pos : node.n_neg) += 1;
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    const std::size_t n = end - begin;
    const bool pure = node.n_pos == 0 || node.n_neg == 0;
    const bool depth_reached = params_.max_depth && depth >= *params_.max_depth;
    if (pure || depth_reached || n < static_cast<std::size_t>(params_.min_samples_split)) return index;

    auto features = per_node_ >= all_features_.size() ? all_features_ : rng_.sample(all_features_, per_node_);
    std::sort(features.begin(), features.end());
    const std::span<const std::size_t> node_samples(samples_.data() + begin, n);
    const auto split = best_split(x_, y_, node_samples, features, params_.criterion);
    if (!split) return index;

    const auto f = static_cast<Eigen::Index>(split->feature);
    const auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](std::size_t r) {
                                             return x_(static_cast<Eigen::Index>(r), f) <= split->threshold;
                                           });
    const auto split_at = static_cast<std::size_t>(mid - samples_.begin());
    const int left = grow(begin, split_at, depth + 1);
    const int right = grow(split_at, end, depth + 1);
    auto& stored = tree_.nodes[static_cast<std::size_t>(index)];
    stored.feature = static_cast<int>(split->feature);
    stored.threshold = split->threshold;
    stored.left = left;
    stored.right = right;
    return index;
  }

  const FeatureMatrix& x_;
  std::span<const int> y_;
  const ForestParams& params_;
  Rng& rng_;
  std::vector<std::size_t> all_features_;
  std::size_t per_node_ = 1;
  std::vector<std::size_t> samples_;
  DecisionTree tree_;
};

std::size_t subsample_size(double fraction, std::size_t n) {
  const auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(m, 1, n);
}

}  // namespace

void ForestParams::validate() const {
  if (n_trees < 1) throw Error(ErrorCode::InvalidArgument, "n_trees must be positive");
  if (max_depth && *max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be positive");
  if (min_samples_split < 2) throw Error(ErrorCode::InvalidArgument, "min_samples_split must be >= 2");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "subsample_fraction must lie in (0, 1]");
}

std::size_t ForestParams::features_per_node(std::size_t n_features) const {
  if (n_features == 0) return 0;
  const double f = static_cast<double>(n_features);
  std::size_t k = n_features;
  switch (max_features) {
    case MaxFeatures::sqrt: k = static_cast<std::size_t>(std::floor(std::sqrt(f))); break;
    case MaxFeatures::log2: k = static_cast<std::size_t>(std::floor(std::log2(f))); break;
    case MaxFeatures::all: break;
  }
  return std::clamp<std::size_t>(k, 1, n_features);
}

std::string ForestParams::describe() const {
  return "n_trees=" + std::to_string(n_trees) +
         " max_depth=" + (max_depth ? std::to_string(*max_depth) : std::string("none")) +
         " criterion=" + std::string(criterion_name(criterion)) +
         " min_samples_split=" + std::to_string(min_samples_split) +
         " max_features=" + std::string(max_features_name(max_features)) +
         " subsample=" + io::exact(subsample_fraction);
}

nlohmann::json ForestParams::to_json() const {
  return {{"n_trees", n_trees},
          {"max_depth", max_depth ? nlohmann::json(*max_depth) : nlohmann::json(nullptr)},
          {"criterion", criterion_name(criterion)},
          {"min_samples_split", min_samples_split},
          {"max_features", max_features_name(max_features)},
          {"subsample_fraction", subsample_fraction}};
}

ForestParams ForestParams::from_json(const nlohmann::json& j) {
  ForestParams p;
  try {
    if (j.contains("n_trees")) p.n_trees = j.at("n_trees").get<int>();
    if (j.contains("max_depth") && !j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<int>();
    if (j.contains("criterion")) p.criterion = criterion_from(j.at("criterion").get<std::string>());
    if (j.contains("min_samples_split")) p.min_samples_split = j.at("min_samples_split").get<int>();
    if (j.contains("max_features")) p.max_features = max_features_from(j.at("max_features").get<std::string>());
    if (j.contains("subsample_fraction")) p.subsample_fraction = j.at("subsample_fraction").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("forest params: ") + e.what());
  }
  p.validate();
  return p;
}

std::vector<ForestParams> default_grid() {
  std::vector<ForestParams> grid;
  for (int trees : {100, 300})
    for (std::optional<int> depth : {std::optional<int>{}, std::optional<int>{10}, std::optional<int>{20}})
      for (auto crit : {Criterion::gini, Criterion::entropy})
        for (int split : {2, 5, 10})
          for (auto mf : {MaxFeatures::sqrt, MaxFeatures::log2}) {
            ForestParams p;
            p.n_trees = trees;
            p.max_depth = depth;
            p.criterion = crit;
            p.min_samples_split = split;
            p.max_features = mf;
            grid.push_back(p);
          }
  return grid;
}

std::vector<ForestParams> grid_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "grid must be a JSON array of forest params");
  std::vector<ForestParams> grid;
  for (const auto& entry : j) grid.push_back(ForestParams::from_json(entry));
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid file lists no configurations");
  return grid;
}

double impurity(std::size_t n_pos, std::size_t n_neg, Criterion criterion) {
  const double n = static_cast<double>(n_pos + n_neg);
  if (n == 0.0) throw Error(ErrorCode::InvalidArgument, "impurity of an empty node");
  const double p = static_cast<double>(n_pos) / n;
  const double q = static_cast<double>(n_neg) / n;
  if (criterion == Criterion::gini) return 1.0 - p * p - q * q;
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (q > 0.0) h -= q * std::log2(q);
  return h;
}

std::optional<Split> best_split(const FeatureMatrix& x, std::span<const int> y,
                                std::span<const std::size_t> samples,
                                std::span<const std::size_t> features, Criterion criterion) {
  const std::size_t n = samples.size();
  if (n < 2) return std::nullopt;
  std::size_t total_pos = 0;
  for (auto r : samples) total_pos += y[r] ? 1 : 0;
  const std::size_t total_neg = n - total_pos;
  if (total_pos == 0 || total_neg == 0) return std::nullopt;
  const double parent = impurity(total_pos, total_neg, criterion);
  const double dn = static_cast<double>(n);

  std::optional<Split> best;
  std::vector<std::pair<double, int>> column(n);
  for (auto f : features) {
    const auto col = static_cast<Eigen::Index>(f);
    for (std::size_t i = 0; i < n; ++i)
      column[i] = {x(static_cast<Eigen::Index>(samples[i]), col), y[samples[i]] ? 1 : 0};
    std::sort(column.begin(), column.end());
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_pos += static_cast<std::size_t>(column[i].second);
      if (!(column[i].first < column[i + 1].first)) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = n - n_left;
      const std::size_t right_pos = total_pos - left_pos;
      const double decrease =
          parent - (static_cast<double>(n_left) / dn) * impurity(left_pos, n_left - left_pos, criterion) -
          (static_cast<double>(n_right) / dn) * impurity(right_pos, n_right - right_pos, criterion);
      if (decrease > kMinImpurityDecrease && (!best || decrease > best->decrease))
        best = Split{f, midpoint(column[i].first, column[i + 1].first), decrease};
    }
  }
  return best;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

DecisionTree grow_tree(const FeatureMatrix& x, std::span<const int> y,
                       std::span<const std::size_t> samples, const ForestParams& params, Rng& rng) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "grow_tree with no samples");
  return TreeBuilder(x, y, params, rng).build(std::vector<std::size_t>(samples.begin(), samples.end()));
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, ForestParams params, FeatureSchema schema,
                         std::uint64_t seed)
    : trees_(std::move(trees)), params_(params), schema_(std::move(schema)), seed_(seed) {
  if (trees_.empty()) throw Error(ErrorCode::InvalidArgument, "forest without trees");
}

Eigen::VectorXd ForestModel::predict_proba(const FeatureMatrix& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != schema_.size())
    throw Error(ErrorCode::SchemaMismatch, "expected " + std::to_string(schema_.size()) +
                                               " feature columns, got " + std::to_string(rows.cols()));
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.leaf(rows.row(r)).positive_fraction();
    out[r] = sum / static_cast<double>(trees_.size());
  }
  return out;
}

std::set<std::size_t> ForestModel::used_features() const {
  std::set<std::size_t> used;
  for (const auto& tree : trees_)
    for (const auto& node : tree.nodes)
      if (!node.is_leaf()) used.insert(static_cast<std::size_t>(node.feature));
  return used;
}

nlohmann::json ForestModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(),
                   n_pos = nlohmann::json::array(), n_neg = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
      feature.push_back(node.feature);
      threshold.push_back(node.threshold);
      left.push_back(node.left);
      right.push_back(node.right);
      n_pos.push_back(node.n_pos);
      n_neg.push_back(node.n_neg);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                     {"right", right}, {"n_pos", n_pos}, {"n_neg", n_neg}});
  }
  return {{"format", "harmony-forest"},
          {"version", 1},
          {"schema", schema_.names()},
          {"schema_hash", schema_.hash()},
          {"params", params_.to_json()},
          {"seed", seed_},
          {"trees", trees}};
}

ForestModel ForestModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "harmony-forest" || j.at("version") != 1)
      throw Error(ErrorCode::ParseError, "not a version-1 harmony forest");
    FeatureSchema schema(j.at("schema").get<std::vector<std::string>>());
    if (schema.hash() != j.at("schema_hash").get<std::string>())
      throw Error(ErrorCode::SchemaMismatch, "schema hash does not match schema names");
    std::vector<DecisionTree> trees;
    for (const auto& t : j.at("trees")) {
      DecisionTree tree;
      const auto& feature = t.at("feature");
      for (std::size_t i = 0; i < feature.size(); ++i) {
        TreeNode node;
        node.feature = feature[i].get<int>();
        node.threshold = t.at("threshold")[i].get<double>();
        node.left = t.at("left")[i].get<int>();
        node.right = t.at("right")[i].get<int>();
        node.n_pos = t.at("n_pos")[i].get<std::uint32_t>();
        node.n_neg = t.at("n_neg")[i].get<std::uint32_t>();
        tree.nodes.push_back(node);
      }
      const auto n_nodes = static_cast<int>(tree.nodes.size());
      if (n_nodes == 0) throw Error(ErrorCode::ParseError, "empty tree");
      for (const auto& node : tree.nodes) {
        if (node.is_leaf()) {
          if (node.n_pos + node.n_neg == 0) throw Error(ErrorCode::ParseError, "empty leaf");
        } else if (node.left <= 0 || node.right <= 0 || node.left >= n_nodes || node.right >= n_nodes ||
                   static_cast<std::size_t>(node.feature) >= schema.size()) {
          throw Error(ErrorCode::ParseError, "malformed tree node");
        }
      }
      trees.push_back(std::move(tree));
    }
    return ForestModel(std::move(trees), ForestParams::from_json(j.at("params")), std::move(schema),
                       j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("forest model: ") + e.what());
  }
}

void ForestModel::save(const std::filesystem::path& path) const {
  io::write_text_atomic(path, to_json().dump() + "\n");
}

ForestModel ForestModel::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

std::string ForestModel::hash() const { return to_hex(sha256(to_json().dump())); }

ForestModel train_forest(const FeatureMatrix& x, std::span<const int> y, const ForestParams& params,
                         const FeatureSchema& schema, std::uint64_t seed,
                         std::span<const std::size_t> rows) {
  params.validate();
  if (static_cast<std::size_t>(x.cols()) != schema.size())
    throw Error(ErrorCode::SchemaMismatch, "feature matrix width differs from schema");
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw Error(ErrorCode::LengthMismatch, "labels and feature rows differ in length");

  std::vector<std::size_t> pool;
  if (rows.empty()) {
    pool.resize(y.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  } else {
    pool.assign(rows.begin(), rows.end());
  }
  std::size_t n_pos = 0;
  for (auto r : pool) n_pos += y[r] ? 1 : 0;
  if (n_pos == 0 || n_pos == pool.size())
    throw Error(ErrorCode::SingleClassData, "training data must contain both classes");

  const std::size_t m = subsample_size(params.subsample_fraction, pool.size());
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    auto sample = m == pool.size() ? pool : rng.sample(pool, m);
    trees.push_back(TreeBuilder(x, y, params, rng).build(std::move(sample)));
  }
  return ForestModel(std::move(trees), params, schema, seed);
}

ForestModel train_forest(const PairSet& data, const ForestParams& params, std::uint64_t seed) {
  const std::vector<int> y(data.gold.data(), data.gold.data() + data.gold.size());
  return train_forest(data.features, y, params, data.schema, seed);
}

std::vector<std::size_t> assign_source_folds(std::size_t n_groups, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  const auto order = rng.permutation(n_groups);
  std::vector<std::size_t> fold(n_groups);
  for (std::size_t pos = 0; pos < n_groups; ++pos) fold[order[pos]] = pos % k;
  return fold;
}

GridSearchResult grid_search_cv(const PairSet& train, std::span<const ForestParams> grid,
                                std::size_t k, std::uint64_t seed) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid search needs at least one configuration");
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs k >= 2");
  if (train.groups.size() < k)
    throw Error(ErrorCode::TooFewSources, std::to_string(train.groups.size()) + " sources for " +
                                              std::to_string(k) + " folds");

  const std::vector<int> y(train.gold.data(), train.gold.data() + train.gold.size());
  const auto fold_of = assign_source_folds(train.groups.size(), k, seed);

  std::vector<std::vector<std::size_t>> fit_rows(k);
  std::vector<std::vector<std::size_t>> held_groups(k);
  for (std::size_t g = 0; g < train.groups.size(); ++g) {
    held_groups[fold_of[g]].push_back(g);
    for (std::size_t f = 0; f < k; ++f) {
      if (f == fold_of[g]) continue;
      for (std::size_t r = train.groups[g].first; r < train.groups[g].second; ++r) fit_rows[f].push_back(r);
    }
  }

  GridSearchResult result;
  result.mean_mrr.reserve(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    double total = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      const auto model = train_forest(train.features, y, grid[c], train.schema,
                                      derive_seed(seed, 0x1000 + f), fit_rows[f]);
      std::vector<double> ranks;
      for (auto g : held_groups[f]) {
        const auto [begin, end] = train.groups[g];
        const auto rows = static_cast<Eigen::Index>(end - begin);
        const Eigen::VectorXd proba =
            model.predict_proba(FeatureMatrix(train.features.middleRows(static_cast<Eigen::Index>(begin), rows)));
        const auto labels = train.gold.segment(static_cast<Eigen::Index>(begin), rows);
        ranks.push_back(best_gold_rank(proba, labels));
      }
      total += mrr_from_ranks(ranks);
    }
    const double mean = total / static_cast<double>(k);
    result.mean_mrr.push_back(mean);
    if (c == 0 || mean > result.mean_mrr[result.best_index]) result.best_index = c;
  }
  result.best = grid[result.best_index];
  return result;
}

}  // namespace harmony

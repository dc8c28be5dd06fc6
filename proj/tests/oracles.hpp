#pragma once
// Slow, obviously-correct reference implementations shared by the unit
// tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "harmony/features.hpp"
#include "harmony/forest.hpp"
#include "harmony/rng.hpp"

namespace oracle {

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1] ? 1u : 0u)});
  return d[a.size()][b.size()];
}

// Rank of every entry: sort descending, then each entry's rank is the mean
// of the first and last 1-based positions holding its score.
inline std::vector<double> ranks(const std::vector<double>& scores) {
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<double> out;
  for (double s : scores) {
    const auto first = std::find(sorted.begin(), sorted.end(), s) - sorted.begin() + 1;
    const auto last = sorted.rend() - std::find(sorted.rbegin(), sorted.rend(), s);
    out.push_back((static_cast<double>(first) + static_cast<double>(last)) / 2.0);
  }
  return out;
}

// Same positional rule as ranks(), evaluated only at the gold entries.
inline double best_gold_rank(const std::vector<double>& scores, const std::vector<int>& gold) {
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double best = 1e300;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!gold[i]) continue;
    const auto first = std::find(sorted.begin(), sorted.end(), scores[i]) - sorted.begin() + 1;
    const auto last = sorted.rend() - std::find(sorted.rbegin(), sorted.rend(), scores[i]);
    best = std::min(best, (static_cast<double>(first) + static_cast<double>(last)) / 2.0);
  }
  return best;
}

inline double hit_ratio(const std::vector<double>& best_ranks, double n) {
  double hits = 0;
  for (double r : best_ranks) hits += r <= n ? 1 : 0;
  return hits / static_cast<double>(best_ranks.size());
}

inline double mrr(const std::vector<double>& best_ranks) {
  double s = 0;
  for (double r : best_ranks) s += 1.0 / r;
  return s / static_cast<double>(best_ranks.size());
}

// Exhaustive-split decision tree: at each node try every feature and every
// midpoint between consecutive distinct values; keep the strictly best
// decrease, scanning features then thresholds in ascending order.
struct Node {
  int feature = -1;
  double threshold = 0;
  std::size_t n_pos = 0, n_neg = 0;
  std::unique_ptr<Node> left, right;
};

inline double gini(std::size_t p, std::size_t n) {
  const double t = static_cast<double>(p + n);
  const double a = static_cast<double>(p) / t, b = static_cast<double>(n) / t;
  return 1.0 - a * a - b * b;
}

inline std::unique_ptr<Node> build_tree(const harmony::FeatureMatrix& x, const std::vector<int>& y,
                                        const std::vector<std::size_t>& rows, int min_split = 2) {
  auto node = std::make_unique<Node>();
  for (auto r : rows) (y[r] ? node->n_pos : node->n_neg) += 1;
  if (node->n_pos == 0 || node->n_neg == 0 || rows.size() < static_cast<std::size_t>(min_split)) return node;

  const double parent = gini(node->n_pos, node->n_neg);
  const double n = static_cast<double>(rows.size());
  double best = harmony::kMinImpurityDecrease;
  std::optional<std::pair<int, double>> choice;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(x(static_cast<Eigen::Index>(r), f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      double t = values[i] / 2 + values[i + 1] / 2;
      if (!(t >= values[i] && t < values[i + 1])) t = values[i];
      std::size_t lp = 0, ln = 0, rp = 0, rn = 0;
      for (auto r : rows) {
        const bool left = x(static_cast<Eigen::Index>(r), f) <= t;
        (left ? (y[r] ? lp : ln) : (y[r] ? rp : rn)) += 1;
      }
      const double dec = parent - static_cast<double>(lp + ln) / n * gini(lp, ln) -
                         static_cast<double>(rp + rn) / n * gini(rp, rn);
      if (dec > best) {
        best = dec;
        choice = {static_cast<int>(f), t};
      }
    }
  }
  if (!choice) return node;
  node->feature = choice->first;
  node->threshold = choice->second;
  std::vector<std::size_t> l, r;
  for (auto row : rows) (x(static_cast<Eigen::Index>(row), choice->first) <= choice->second ? l : r).push_back(row);
  node->left = build_tree(x, y, l, min_split);
  node->right = build_tree(x, y, r, min_split);
  return node;
}

inline bool same_tree(const Node& o, const harmony::DecisionTree& t, int index = 0) {
  const auto& n = t.nodes[static_cast<std::size_t>(index)];
  if (n.n_pos != o.n_pos || n.n_neg != o.n_neg) return false;
  if (o.feature < 0) return n.is_leaf();
  if (n.feature != o.feature || n.threshold != o.threshold) return false;
  return same_tree(*o.left, t, n.left) && same_tree(*o.right, t, n.right);
}

inline double leaf_fraction(const Node& o, const Eigen::RowVectorXd& x) {
  const Node* n = &o;
  while (n->feature >= 0) n = x(n->feature) <= n->threshold ? n->left.get() : n->right.get();
  return static_cast<double>(n->n_pos) / static_cast<double>(n->n_pos + n->n_neg);
}

// Random small fixture with coarse values so that ties are common.
inline void small_fixture(harmony::Rng& rng, harmony::FeatureMatrix& x, std::vector<int>& y) {
  const auto n = 2 + rng.uniform_index(11);
  const auto f = 1 + rng.uniform_index(4);
  x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(rng.uniform_index(5)) / 4.0;
    y[i] = static_cast<int>(rng.uniform_index(2));
  }
}

// Points in the unit square labelled by x0 + x1 > 1, with a 0.1 band
// around the boundary left empty.
inline void separable(harmony::Rng& rng, std::size_t n, harmony::FeatureMatrix& x, std::vector<int>& y) {
  x.resize(static_cast<Eigen::Index>(n), 2);
  y.clear();
  for (std::size_t i = 0; i < n;) {
    const double a = rng.uniform01(), b = rng.uniform01();
    if (std::abs(a + b - 1.0) < 0.1) continue;
    x(static_cast<Eigen::Index>(i), 0) = a;
    x(static_cast<Eigen::Index>(i), 1) = b;
    y.push_back(a + b > 1.0 ? 1 : 0);
    ++i;
  }
}

inline harmony::FeatureSchema schema_of(Eigen::Index cols) {
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  return harmony::FeatureSchema(names);
}

}  // namespace oracle

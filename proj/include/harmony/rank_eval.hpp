#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace harmony {

/// Tie-aware ranks aligned with the input positions: sorting by score
/// descending, a group of g equal scores occupying positions p..p+g-1 gets
/// rank (2p + g - 1) / 2. Ties are exact equality.
std::vector<double> assign_ranks(std::span<const double> scores);

/// Rank of the best-placed gold entry under assign_ranks, in O(n):
/// (#scores above the best gold score) + (#scores equal to it + 1) / 2.
/// Returns 0 when no entry is gold.
template <typename Scores, typename Mask>
double best_gold_rank(const Scores& scores, const Mask& is_gold) {
  bool found = false;
  double best = 0.0;
  const auto n = static_cast<std::size_t>(scores.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (is_gold[i] && (!found || scores[i] > best)) {
      best = scores[i];
      found = true;
    }
  }
  if (!found) return 0.0;
  std::size_t above = 0, equal = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (scores[i] > best) {
      ++above;
    } else if (scores[i] == best) {
      ++equal;
    }
  }
  return static_cast<double>(above) + static_cast<double>(equal + 1) / 2.0;
}

struct RankedEntry {
  std::string target;
  double score = 0.0;
  double rank = 0.0;
  bool gold = false;
};

/// Candidates for one source, sorted by score descending (ties keep input order).
struct RankedList {
  std::string source;
  std::vector<RankedEntry> entries;
  std::set<std::string> gold_targets;

  /// Smallest assigned rank among gold entries; throws GoldMissing if none.
  double best_gold_rank() const;
};

RankedList rank_candidates(std::string source, std::span<const std::string> targets,
                           std::span<const double> scores, const std::set<std::string>& gold_targets);

/// 1 / best gold rank.
double reciprocal_rank(const RankedList& list);
/// Fraction of lists whose best gold rank is <= n.
double hit_ratio(std::span<const RankedList> lists, double n);
double mrr(std::span<const RankedList> lists);

/// Metrics from best-gold ranks directly (one entry per source).
double hit_ratio_from_ranks(std::span<const double> best_ranks, double n);
double mrr_from_ranks(std::span<const double> best_ranks);

inline const std::vector<int> kDefaultCutoffs = {5, 10, 15, 20, 30};

struct MetricReport {
  std::map<int, double> hr;
  double mrr = 0.0;
  std::map<std::string, double> per_source_rr;

  /// "HR-5" style names plus "MRR".
  double metric(const std::string& name) const;
};

MetricReport evaluate(std::span<const RankedList> lists, std::span<const int> cutoffs = kDefaultCutoffs);
MetricReport evaluate_ranks(std::span<const std::string> sources, std::span<const double> best_ranks,
                            std::span<const int> cutoffs = kDefaultCutoffs);

}  // namespace harmony

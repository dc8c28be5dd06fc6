#include "harmony/rank_eval.hpp"

#include <algorithm>
#include <numeric>

#include "harmony/error.hpp"

namespace harmony {

namespace {

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::vector<double> assign_ranks(std::span<const double> scores) {
  const auto order = descending_order(scores);
  std::vector<double> ranks(scores.size());
  std::size_t p = 0;
  while (p < order.size()) {
    std::size_t q = p;
    while (q + 1 < order.size() && scores[order[q + 1]] == scores[order[p]]) ++q;
    // 1-based positions p+1 .. q+1
    const double rank = static_cast<double>(p + 1 + q + 1) / 2.0;
    for (std::size_t i = p; i <= q; ++i) ranks[order[i]] = rank;
    p = q + 1;
  }
  return ranks;
}

double RankedList::best_gold_rank() const {
  double best = 0.0;
  for (const auto& e : entries)
    if (e.gold && (best == 0.0 || e.rank < best)) best = e.rank;
  if (best == 0.0) throw Error(ErrorCode::GoldMissing, source);
  return best;
}

RankedList rank_candidates(std::string source, std::span<const std::string> targets,
                           std::span<const double> scores, const std::set<std::string>& gold_targets) {
  if (targets.size() != scores.size())
    throw Error(ErrorCode::LengthMismatch, "targets and scores differ in length");
  const auto ranks = assign_ranks(scores);
  const auto order = descending_order(scores);
  RankedList list;
  list.source = std::move(source);
  list.gold_targets = gold_targets;
  list.entries.reserve(targets.size());
  for (auto i : order)
    list.entries.push_back({targets[i], scores[i], ranks[i], gold_targets.contains(targets[i])});
  return list;
}

double reciprocal_rank(const RankedList& list) { return 1.0 / list.best_gold_rank(); }

double hit_ratio(std::span<const RankedList> lists, double n) {
  if (lists.empty()) throw Error(ErrorCode::InvalidArgument, "hit_ratio over no lists");
  std::size_t hits = 0;
  for (const auto& l : lists)
    if (l.best_gold_rank() <= n) ++hits;
  return static_cast<double>(hits) / static_cast<double>(lists.size());
}

double mrr(std::span<const RankedList> lists) {
  if (lists.empty()) throw Error(ErrorCode::InvalidArgument, "mrr over no lists");
  double sum = 0.0;
  for (const auto& l : lists) sum += reciprocal_rank(l);
  return sum / static_cast<double>(lists.size());
}

double hit_ratio_from_ranks(std::span<const double> best_ranks, double n) {
  if (best_ranks.empty()) throw Error(ErrorCode::InvalidArgument, "hit_ratio over no ranks");
  std::size_t hits = 0;
  for (double r : best_ranks) {
    if (r <= 0.0) throw Error(ErrorCode::GoldMissing, "source without gold");
    if (r <= n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(best_ranks.size());
}

double mrr_from_ranks(std::span<const double> best_ranks) {
  if (best_ranks.empty()) throw Error(ErrorCode::InvalidArgument, "mrr over no ranks");
  double sum = 0.0;
  for (double r : best_ranks) {
    if (r <= 0.0) throw Error(ErrorCode::GoldMissing, "source without gold");
    sum += 1.0 / r;
  }
  return sum / static_cast<double>(best_ranks.size());
}

double MetricReport::metric(const std::string& name) const {
  if (name == "MRR") return mrr;
  if (name.starts_with("HR-")) {
    const int n = std::stoi(name.substr(3));
    auto it = hr.find(n);
    if (it != hr.end()) return it->second;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric " + name);
}

MetricReport evaluate(std::span<const RankedList> lists, std::span<const int> cutoffs) {
  std::vector<std::string> sources;
  std::vector<double> ranks;
  for (const auto& l : lists) {
    sources.push_back(l.source);
    ranks.push_back(l.best_gold_rank());
  }
  return evaluate_ranks(sources, ranks, cutoffs);
}

MetricReport evaluate_ranks(std::span<const std::string> sources, std::span<const double> best_ranks,
                            std::span<const int> cutoffs) {
  if (sources.size() != best_ranks.size())
    throw Error(ErrorCode::LengthMismatch, "sources and ranks differ in length");
  MetricReport report;
  for (int n : cutoffs) report.hr[n] = hit_ratio_from_ranks(best_ranks, n);
  report.mrr = mrr_from_ranks(best_ranks);
  for (std::size_t i = 0; i < sources.size(); ++i) report.per_source_rr[sources[i]] = 1.0 / best_ranks[i];
  return report;
}

}  // namespace harmony

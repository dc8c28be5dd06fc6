#include "harmony/fuzzy.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace harmony {

namespace {

std::string join_sorted(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string concat_blocks(const std::string& head, const std::string& tail) {
  if (head.empty()) return tail;
  if (tail.empty()) return head;
  return head + ' ' + tail;
}

std::vector<std::string> dedup_sorted(const std::vector<std::string>& tokens) {
  std::vector<std::string> out(tokens);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t lcs_length(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t indel_distance(std::string_view a, std::string_view b) {
  return a.size() + b.size() - 2 * lcs_length(a, b);
}

FuzzyScore indel_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return {100.0};
  const double dist = static_cast<double>(indel_distance(a, b));
  return {(1.0 - dist / static_cast<double>(total)) * 100.0};
}

FuzzyScore token_sort_ratio(const NormalizedText& a, const NormalizedText& b) {
  return indel_ratio(join_sorted(a.tokens), join_sorted(b.tokens));
}

FuzzyScore token_set_ratio(const NormalizedText& a, const NormalizedText& b) {
  const auto set_a = dedup_sorted(a.tokens);
  const auto set_b = dedup_sorted(b.tokens);
  if (set_a.empty() && set_b.empty()) return {100.0};
  if (set_a.empty() || set_b.empty()) return {0.0};

  std::vector<std::string> common, only_a, only_b;
  std::set_intersection(set_a.begin(), set_a.end(), set_b.begin(), set_b.end(),
                        std::back_inserter(common));
  std::set_difference(set_a.begin(), set_a.end(), set_b.begin(), set_b.end(),
                      std::back_inserter(only_a));
  std::set_difference(set_b.begin(), set_b.end(), set_a.begin(), set_a.end(),
                      std::back_inserter(only_b));

  const std::string t0 = join_sorted(std::move(common));
  const std::string t1 = concat_blocks(t0, join_sorted(std::move(only_a)));
  const std::string t2 = concat_blocks(t0, join_sorted(std::move(only_b)));
  return std::max({indel_ratio(t0, t1), indel_ratio(t0, t2), indel_ratio(t1, t2)});
}

}  // namespace harmony

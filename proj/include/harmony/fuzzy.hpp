#pragma once

#include <cstddef>
#include <string_view>

#include "harmony/text_prep.hpp"

namespace harmony {

/// Similarity on the 0..100 scale, stored unrounded.
struct FuzzyScore {
  double value = 0.0;
  friend auto operator<=>(const FuzzyScore&, const FuzzyScore&) = default;
};

/// Unit-cost insert/delete/substitute edit distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::string_view a, std::string_view b);

/// Insert/delete-only distance: |a| + |b| - 2 LCS(a, b).
std::size_t indel_distance(std::string_view a, std::string_view b);

/// (1 - indel / (|a| + |b|)) * 100; two empty strings score 100.
FuzzyScore indel_ratio(std::string_view a, std::string_view b);

/// indel_ratio of the alphabetically sorted, space-joined tokens.
FuzzyScore token_sort_ratio(const NormalizedText& a, const NormalizedText& b);

/// Token-set construction over deduplicated token sets A and B:
///   t0 = sorted(A & B), t1 = t0 + sorted(A - B), t2 = t0 + sorted(B - A)
///   score = max(ratio(t0, t1), ratio(t0, t2), ratio(t1, t2))
/// Blocks are joined with one space. Empty against non-empty scores 0.
FuzzyScore token_set_ratio(const NormalizedText& a, const NormalizedText& b);

}  // namespace harmony

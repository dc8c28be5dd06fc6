#include "doctest.h"

#include <algorithm>
#include <vector>

#include "harmony/fuzzy.hpp"
#include "harmony/rng.hpp"

using namespace harmony;

namespace {

std::size_t dp_levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

std::string random_string(Rng& rng, std::size_t max_len) {
  std::string s(rng.uniform_index(max_len + 1), 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng.uniform_index(4));
  return s;
}

NormalizedText toks(std::initializer_list<const char*> words) {
  NormalizedText t;
  for (const auto* w : words) t.tokens.emplace_back(w);
  return t;
}

}  // namespace

TEST_CASE("levenshtein examples") {
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("kitten", "sitting") == 3);
}

TEST_CASE("levenshtein matches the full DP table") {
  Rng rng(1);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_string(rng, 12), b = random_string(rng, 12);
    CHECK(levenshtein(a, b) == dp_levenshtein(a, b));
  }
}

TEST_CASE("indel ratio") {
  CHECK(indel_ratio("abc", "abc").value == 100.0);
  CHECK(indel_ratio("abc", "").value == 0.0);
  CHECK(indel_ratio("", "").value == 100.0);
  CHECK(indel_ratio("abcd", "bcde").value == doctest::Approx(75.0).epsilon(1e-12));
  CHECK(lcs_length("abcd", "bcde") == 3);
  CHECK(indel_distance("abcd", "bcde") == 2);
}

TEST_CASE("token sort ratio") {
  CHECK(token_sort_ratio(toks({"b", "a"}), toks({"a", "b"})).value == 100.0);
  CHECK(token_sort_ratio(toks({"x", "y"}), toks({"y", "z"})).value == doctest::Approx(33.3333).epsilon(1e-4));
  CHECK(token_sort_ratio(toks({}), toks({})).value == 100.0);
}

TEST_CASE("token set ratio") {
  CHECK(token_set_ratio(toks({"fuzzy", "fuzzy", "bear"}), toks({"fuzzy", "bear"})).value == 100.0);
  CHECK(token_set_ratio(toks({"a", "b", "c"}), toks({"a", "b", "c"})).value == 100.0);
  CHECK(token_set_ratio(toks({"a", "b", "c"}), toks({"a", "b", "d"})).value == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(token_set_ratio(toks({}), toks({"a"})).value == 0.0);
  CHECK(token_set_ratio(toks({}), toks({})).value == 100.0);
  // A subset scores 100 because t0 equals one side.
  CHECK(token_set_ratio(toks({"sex"}), toks({"sex", "male", "femal"})).value == 100.0);
}

TEST_CASE("token set ratio properties on random token lists") {
  Rng rng(2);
  const std::vector<std::string> vocab = {"bmi", "age", "sex", "date", "visit", "score", "mmse", "q1"};
  auto draw = [&] {
    NormalizedText t;
    const auto n = rng.uniform_index(6);
    for (std::size_t i = 0; i < n; ++i) t.tokens.push_back(vocab[rng.uniform_index(vocab.size())]);
    return t;
  };
  for (int i = 0; i < 300; ++i) {
    const auto a = draw(), b = draw();
    const double ab = token_set_ratio(a, b).value;
    CHECK(ab == token_set_ratio(b, a).value);
    CHECK(ab >= 0.0);
    CHECK(ab <= 100.0);
    auto shuffled = a;
    rng.shuffle(std::span<std::string>(shuffled.tokens));
    shuffled.tokens.insert(shuffled.tokens.end(), a.tokens.begin(), a.tokens.end());
    CHECK(token_set_ratio(a, shuffled).value == 100.0);
  }
}

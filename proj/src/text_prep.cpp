#include "harmony/text_prep.hpp"

#include <algorithm>
#include <string_view>
#include <unordered_map>

#include "harmony/dictionary.hpp"
#include "harmony/error.hpp"
#include "harmony/io.hpp"

namespace harmony {

namespace {

#include "stopwords.inc"

bool is_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and are kept as word
// characters.
bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view strip_edge_punct(std::string_view word) {
  while (!word.empty() && !is_word_byte(static_cast<unsigned char>(word.front()))) word.remove_prefix(1);
  while (!word.empty() && !is_word_byte(static_cast<unsigned char>(word.back()))) word.remove_suffix(1);
  return word;
}

std::string join_words(const std::vector<std::string>& words, std::size_t limit) {
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < limit; ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = is_space(static_cast<unsigned char>(c));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

const StopwordList& StopwordList::english() {
  static const StopwordList list = parse(kEmbeddedStopwords);
  return list;
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  return parse(io::read_text(path));
}

StopwordList StopwordList::parse(std::string_view text) {
  StopwordList list;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && is_space(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && is_space(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    std::string word(line);
    std::transform(word.begin(), word.end(), word.begin(), lower);
    list.words_.insert(std::move(word));
  }
  return list;
}

std::string NormalizedText::joined() const { return join_words(tokens, tokens.size()); }

NormalizedText normalize_for_fuzzy(std::string_view text, const StopwordList& stopwords) {
  NormalizedText out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (!stopwords.contains(token)) {
      std::string stem = stem_fixpoint(token);
      if (!stem.empty() && !stopwords.contains(stem)) out.tokens.push_back(std::move(stem));
    }
    token.clear();
  };
  for (char c : text) {
    if (is_word_byte(static_cast<unsigned char>(c))) {
      token.push_back(lower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string TermFrequencyKeywords::extract(std::string_view text, std::size_t max_words) {
  struct Candidate {
    std::string surface;
    std::size_t first = 0;
    std::size_t count = 0;
  };
  std::vector<Candidate> candidates;
  std::unordered_map<std::string, std::size_t> by_stem;

  const auto words = split_words(text);
  for (std::size_t pos = 0; pos < words.size(); ++pos) {
    const auto surface = strip_edge_punct(words[pos]);
    if (surface.empty()) continue;
    const auto norm = normalize_for_fuzzy(surface, *stopwords_);
    if (norm.tokens.empty()) continue;
    const auto key = norm.joined();
    auto [it, inserted] = by_stem.emplace(key, candidates.size());
    if (inserted) candidates.push_back({std::string(surface), pos, 0});
    ++candidates[it->second].count;
  }

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].count > candidates[b].count;
  });
  if (order.size() > max_words) order.resize(max_words);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return candidates[a].first < candidates[b].first; });

  std::vector<std::string> chosen;
  chosen.reserve(order.size());
  for (auto i : order) chosen.push_back(candidates[i].surface);
  return join_words(chosen, chosen.size());
}

std::string derive_keyword_text(std::string_view rule, KeywordProvider& extractor) {
  const auto words = word_count(rule);
  if (words == 0) return {};
  if (words <= kKeywordGateWords) return std::string(rule);
  const auto keywords = extractor.extract(rule, kMaxKeywordWords);
  return join_words(split_words(keywords), kMaxKeywordWords);
}

MatchTexts build_match_texts(const VariableRecord& rec, std::string_view keyword_text) {
  MatchTexts texts;
  texts.label_text = rec.label;
  texts.sheet_text = rec.sheet_desc;
  texts.label_key_text = rec.label;
  if (!keyword_text.empty()) {
    texts.label_key_text += kLabelKeySeparator;
    texts.label_key_text += keyword_text;
  }
  return texts;
}

}  // namespace harmony

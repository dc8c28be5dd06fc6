#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace harmony {

struct VariableRecord;

/// Number of whitespace-delimited tokens in the raw text.
std::size_t word_count(std::string_view text);

/// Splits on ASCII whitespace.
std::vector<std::string> split_words(std::string_view text);

/// Porter (1980) suffix-stripping stemmer over lowercase ASCII words.
/// Words of two letters or fewer, and words with non-letter bytes, are
/// returned unchanged.
std::string porter_stem(std::string_view word);

/// Applies porter_stem until the word stops changing.
std::string stem_fixpoint(std::string_view word);

class StopwordList {
 public:
  /// The list shipped in data/stopwords_en_v1.txt, compiled in.
  static const StopwordList& english();
  /// One token per line, UTF-8; blank lines and `#` comments ignored.
  static StopwordList load(const std::filesystem::path& path);
  static StopwordList parse(std::string_view text);

  bool contains(std::string_view token) const { return words_.contains(std::string(token)); }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Lowercase, stemmed, stopword-free tokens in input order. Duplicates kept.
struct NormalizedText {
  std::vector<std::string> tokens;

  std::string joined() const;
  friend bool operator==(const NormalizedText&, const NormalizedText&) = default;
};

/// Fuzzy-matching preprocessing: punctuation becomes a token boundary,
/// ASCII letters are lowercased, stopwords dropped, remaining tokens stemmed
/// to a fixpoint, and any stem that lands on a stopword dropped too. The
/// result is idempotent: normalizing `joined()` gives the same tokens.
NormalizedText normalize_for_fuzzy(std::string_view text,
                                   const StopwordList& stopwords = StopwordList::english());

/// Source of key words for long derivation rules.
class KeywordProvider {
 public:
  virtual ~KeywordProvider() = default;
  /// At most `max_words` words, each drawn from `text`.
  virtual std::string extract(std::string_view text, std::size_t max_words) = 0;
};

/// Offline extractor: ranks the rule's content words by stemmed frequency
/// (ties by first occurrence) and emits the winners in text order.
class TermFrequencyKeywords final : public KeywordProvider {
 public:
  explicit TermFrequencyKeywords(const StopwordList& stopwords = StopwordList::english())
      : stopwords_(&stopwords) {}
  std::string extract(std::string_view text, std::size_t max_words) override;

 private:
  const StopwordList* stopwords_;
};

inline constexpr std::size_t kKeywordGateWords = 20;
inline constexpr std::size_t kMaxKeywordWords = 15;

/// Rules of at most 20 words are kept verbatim; longer rules are replaced by
/// the extractor's key words, truncated to 15 words.
std::string derive_keyword_text(std::string_view rule, KeywordProvider& extractor);

/// The three texts compared for every pair.
struct MatchTexts {
  std::string label_text;
  std::string sheet_text;
  std::string label_key_text;
};

inline constexpr std::string_view kLabelKeySeparator = ", ";

MatchTexts build_match_texts(const VariableRecord& rec, std::string_view keyword_text);

}  // namespace harmony

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "harmony/csv.hpp"

namespace harmony {

enum class Side { source, target };

std::string_view to_string(Side side);
Side side_from_string(std::string_view text);

/// One data-dictionary entry. An absent derivation rule is the empty string.
struct VariableRecord {
  std::string name;
  std::string label;
  std::string sheet_desc;
  std::string derivation_rule;
  Side side = Side::source;

  friend bool operator==(const VariableRecord&, const VariableRecord&) = default;
};

/// Binds the dictionary's header names to the four record fields.
struct ColumnMap {
  std::string name = "name";
  std::string label = "label";
  std::string sheet = "sheet";
  std::string rule = "rule";
};

struct Provenance {
  std::string path;
  std::string format = "csv";
};

/// Immutable, input-ordered collection of records with unique names.
class DataDictionary {
 public:
  DataDictionary() = default;
  DataDictionary(Side side, std::vector<VariableRecord> records, Provenance provenance = {});

  Side side() const noexcept { return side_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  const std::vector<VariableRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }
  const VariableRecord& operator[](std::size_t i) const { return records_[i]; }

  const VariableRecord* find(std::string_view name) const;
  /// Position of `name` in input order, or -1.
  std::ptrdiff_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name) >= 0; }

  friend bool operator==(const DataDictionary& a, const DataDictionary& b) {
    return a.side_ == b.side_ && a.records_ == b.records_;
  }

 private:
  Side side_ = Side::source;
  std::vector<VariableRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  Provenance provenance_;
};

/// Fail-fast: the first invalid row aborts the whole parse.
DataDictionary parse_dictionary(const csv::Table& table, Side side, const ColumnMap& columns = {},
                                Provenance provenance = {});
DataDictionary load_dictionary(const std::filesystem::path& path, Side side,
                               const ColumnMap& columns = {});

/// Writes the four fields under `columns`' header names.
csv::Table serialize_dictionary(const DataDictionary& dict, const ColumnMap& columns = {});

struct ReshapeSpec {
  std::string key_variable;
  std::string value_variable;
  std::string label_template;
  std::string name_template;

  /// Throws TemplateMissingPlaceholder unless both templates hold `{key}` exactly once.
  void validate() const;
  static ReshapeSpec from_json(std::string_view json_text);
};

struct LongRow {
  std::string key;
  std::string value;
};

/// Reads the `key_variable` / `value_variable` columns of a long-format sheet.
std::vector<LongRow> long_rows_from_table(const csv::Table& table, const ReshapeSpec& spec);

/// One record per distinct key; `sheet_desc` is inherited from the long sheet.
std::vector<VariableRecord> long_to_wide(std::span<const LongRow> rows, const ReshapeSpec& spec,
                                         std::string_view sheet_desc, Side side = Side::source);

struct CorpusStats {
  double mean_label_words = 0.0;
  double mean_sheet_words = 0.0;
  double mean_rule_words = 0.0;
  std::size_t n_records = 0;
};

CorpusStats corpus_stats(const DataDictionary& dict);

}  // namespace harmony

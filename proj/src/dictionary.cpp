#include "harmony/dictionary.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"

#include "harmony/error.hpp"
#include "harmony/text_prep.hpp"

namespace harmony {

namespace {

std::string trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::size_t require_column(const csv::Table& table, const std::string& name) {
  auto idx = table.column(name);
  if (!idx) throw Error(ErrorCode::MissingColumn, name);
  return *idx;
}

const std::string& cell(const std::vector<std::string>& row, std::size_t col) {
  static const std::string empty;
  return col < row.size() ? row[col] : empty;
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

std::string substitute_key(std::string_view tmpl, std::string_view key) {
  constexpr std::string_view placeholder = "{key}";
  const auto pos = tmpl.find(placeholder);
  std::string out(tmpl.substr(0, pos));
  out += key;
  out += tmpl.substr(pos + placeholder.size());
  return out;
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::source ? "source" : "target"; }

Side side_from_string(std::string_view text) {
  if (text == "source") return Side::source;
  if (text == "target") return Side::target;
  throw Error(ErrorCode::InvalidArgument, "side must be 'source' or 'target', got '" +
                                             std::string(text) + "'");
}

DataDictionary::DataDictionary(Side side, std::vector<VariableRecord> records,
                               Provenance provenance)
    : side_(side), records_(std::move(records)), provenance_(std::move(provenance)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto& rec = records_[i];
    if (rec.name.empty()) throw Error(ErrorCode::InvalidArgument, "empty name at row " + std::to_string(i));
    if (rec.label.empty()) throw Error(ErrorCode::EmptyLabel, std::to_string(i));
    rec.side = side_;
    if (!index_.emplace(rec.name, i).second) throw Error(ErrorCode::DuplicateName, rec.name);
  }
}

const VariableRecord* DataDictionary::find(std::string_view name) const {
  auto i = index_of(name);
  return i < 0 ? nullptr : &records_[static_cast<std::size_t>(i)];
}

std::ptrdiff_t DataDictionary::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

DataDictionary parse_dictionary(const csv::Table& table, Side side, const ColumnMap& columns,
                                Provenance provenance) {
  const auto name_col = require_column(table, columns.name);
  const auto label_col = require_column(table, columns.label);
  const auto sheet_col = require_column(table, columns.sheet);
  const auto rule_col = require_column(table, columns.rule);
  if (table.rows.empty()) throw Error(ErrorCode::EmptyInput, "dictionary has no data rows");

  std::vector<VariableRecord> records;
  records.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    VariableRecord rec{trim(cell(row, name_col)), trim(cell(row, label_col)),
                       trim(cell(row, sheet_col)), trim(cell(row, rule_col)), side};
    if (rec.name.empty())
      throw Error(ErrorCode::InvalidArgument, "empty variable name at row " + std::to_string(r));
    if (rec.label.empty()) throw Error(ErrorCode::EmptyLabel, std::to_string(r));
    if (!seen.insert(rec.name).second) throw Error(ErrorCode::DuplicateName, rec.name);
    records.push_back(std::move(rec));
  }
  return DataDictionary(side, std::move(records), std::move(provenance));
}

DataDictionary load_dictionary(const std::filesystem::path& path, Side side,
                               const ColumnMap& columns) {
  return parse_dictionary(csv::read_file(path), side, columns, Provenance{path.string(), "csv"});
}

csv::Table serialize_dictionary(const DataDictionary& dict, const ColumnMap& columns) {
  csv::Table table;
  table.header = {columns.name, columns.label, columns.sheet, columns.rule};
  table.rows.reserve(dict.size());
  for (const auto& rec : dict)
    table.rows.push_back({rec.name, rec.label, rec.sheet_desc, rec.derivation_rule});
  return table;
}

void ReshapeSpec::validate() const {
  if (count_occurrences(label_template, "{key}") != 1)
    throw Error(ErrorCode::TemplateMissingPlaceholder, "label_template: " + label_template);
  if (count_occurrences(name_template, "{key}") != 1)
    throw Error(ErrorCode::TemplateMissingPlaceholder, "name_template: " + name_template);
}

ReshapeSpec ReshapeSpec::from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("reshape spec: ") + e.what());
  }
  ReshapeSpec spec;
  for (auto [field, key] : {std::pair{&spec.key_variable, "key_variable"},
                            std::pair{&spec.value_variable, "value_variable"},
                            std::pair{&spec.label_template, "label_template"},
                            std::pair{&spec.name_template, "name_template"}}) {
    if (!j.contains(key) || !j[key].is_string())
      throw Error(ErrorCode::ParseError, std::string("reshape spec missing string field ") + key);
    *field = j[key].get<std::string>();
  }
  spec.validate();
  return spec;
}

std::vector<LongRow> long_rows_from_table(const csv::Table& table, const ReshapeSpec& spec) {
  const auto key_col = require_column(table, spec.key_variable);
  const auto value_col = require_column(table, spec.value_variable);
  std::vector<LongRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& row : table.rows) rows.push_back({trim(cell(row, key_col)), trim(cell(row, value_col))});
  return rows;
}

std::vector<VariableRecord> long_to_wide(std::span<const LongRow> rows, const ReshapeSpec& spec,
                                         std::string_view sheet_desc, Side side) {
  spec.validate();
  std::vector<VariableRecord> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& key = rows[i].key;
    if (key.empty()) throw Error(ErrorCode::InvalidArgument, "empty key at row " + std::to_string(i));
    if (!seen.insert(key).second) throw Error(ErrorCode::DuplicateKey, key);
    out.push_back(VariableRecord{substitute_key(spec.name_template, key),
                                 substitute_key(spec.label_template, key), std::string(sheet_desc),
                                 "", side});
  }
  return out;
}

CorpusStats corpus_stats(const DataDictionary& dict) {
  if (dict.empty()) throw Error(ErrorCode::EmptyInput, "corpus_stats on empty dictionary");
  CorpusStats stats;
  stats.n_records = dict.size();
  for (const auto& rec : dict) {
    stats.mean_label_words += static_cast<double>(word_count(rec.label));
    stats.mean_sheet_words += static_cast<double>(word_count(rec.sheet_desc));
    stats.mean_rule_words += static_cast<double>(word_count(rec.derivation_rule));
  }
  const auto n = static_cast<double>(stats.n_records);
  stats.mean_label_words /= n;
  stats.mean_sheet_words /= n;
  stats.mean_rule_words /= n;
  return stats;
}

}  // namespace harmony

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harmony::csv {

/// A header plus data rows. Rows may be ragged; lookups past the end of a
/// row yield the empty string.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

/// RFC 4180 parsing: quoted fields, doubled quotes, embedded separators and
/// newlines, CRLF line endings, and a leading UTF-8 BOM.
Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);
std::string format(const Table& table);
void write_file(const std::filesystem::path& path, const Table& table);

}  // namespace harmony::csv

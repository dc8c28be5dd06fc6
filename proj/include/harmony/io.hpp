#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace harmony::io {

std::string read_text(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it over `path`, so readers
/// see either the old or the new content.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Fixed-notation decimal with `digits` fractional digits.
std::string fixed(double value, int digits = 6);

/// printf %.<digits>g.
std::string general(double value, int digits = 6);

/// Shortest representation that round-trips to the same double.
std::string exact(double value);

}  // namespace harmony::io

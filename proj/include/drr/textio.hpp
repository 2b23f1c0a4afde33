#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace drr {

/// Whole file as a string; throws DataError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate + write + check.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Splits on '\n' (dropping a trailing '\r'); the final empty line after a
/// trailing newline is not returned.
std::vector<std::string_view> split_lines(std::string_view text);
/// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_fields(std::string_view line);

/// Parses a decimal float at single precision (the value is rounded to the
/// nearest float). Returns false on any trailing garbage or non-finite value.
bool parse_float(std::string_view s, double& out) noexcept;
/// Shortest decimal text that round-trips through float.
std::string format_float(double v);

}  // namespace drr

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aegis::util {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept;

/// Number of non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept;

std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Truncates to at most `max_chars` bytes (on a UTF-8 boundary) appending
/// "..." when anything was cut. `max_chars` includes the marker.
std::string truncate_with_ellipsis(std::string_view s, std::size_t max_chars);

/// Formats with a fixed number of decimals ("7.60").
std::string fixed(double v, int decimals);

/// Current UTC time as ISO-8601 ("2026-10-19T12:00:00Z").
std::string utc_timestamp();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace aegis::util

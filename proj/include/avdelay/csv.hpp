#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avdelay::csv {

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

// True for the empty cell and the accepted missing-value sentinels ("NA", "-").
bool is_missing(std::string_view cell);

std::optional<double> parse_double(std::string_view cell);
std::optional<long long> parse_int(std::string_view cell);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace avdelay::csv

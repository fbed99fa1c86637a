#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ems {

// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

// Whole-string parse; rejects trailing junk, NaN and infinities.
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view text);

// "a, b ,c" -> {"a","b","c"}; empty items dropped.
std::vector<std::string> split_list(std::string_view text, char separator = ',');

std::string csv_escape(std::string_view field);

std::string sha256_hex(std::string_view bytes);

}  // namespace ems

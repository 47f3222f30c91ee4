#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lmlcc::text {

std::string_view trim(std::string_view s);

/// Split on a single delimiter; empty fields are kept.
std::vector<std::string> split(std::string_view s, char delim);

/// Split on runs of whitespace; empty fields are dropped.
std::vector<std::string> split_ws(std::string_view s);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Fixed-point formatting with the given number of decimals.
std::string format_fixed(double v, int decimals);

}  // namespace lmlcc::text

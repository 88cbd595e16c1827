#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fn::util {

/// ASCII case fold. Non-ASCII UTF-8 bytes pass through unchanged.
std::string to_lower(std::string_view s);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

bool iequals(std::string_view a, std::string_view b);

/// Strict numeric parsing: the whole (trimmed) field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Accepts true/false/1/0, case-insensitive.
std::optional<bool> parse_bool(std::string_view s);

/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

std::string url_encode(std::string_view s);
std::string url_decode(std::string_view s);

}  // namespace fn::util

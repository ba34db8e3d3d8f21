#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace navkit::text {

/// Shortest decimal that parses back to the same double; '.' separator regardless of locale.
std::string format_double(double v);
/// Fixed-point rendering with `digits` decimals.
std::string format_fixed(double v, int digits);
/// Microsecond timestamp rendered as seconds with six fractional digits.
std::string format_micros(std::int64_t micros);

/// Strict parse of a whole token; returns false on any trailing garbage or non-finite value.
bool parse_double(std::string_view token, double& out);
/// Parses "<int>[.<up to 6 digits>]" into microseconds.
bool parse_micros(std::string_view token, std::int64_t& out);
std::int64_t seconds_to_micros(double seconds);
double micros_to_seconds(std::int64_t micros);

/// Splits on runs of ASCII spaces and tabs.
std::vector<std::string_view> split_ws(std::string_view line);

}  // namespace navkit::text

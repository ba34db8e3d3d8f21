#include "navkit/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace navkit::text {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int digits) {
  char buf[128];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  std::string out(buf, res.ptr);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string format_micros(std::int64_t micros) {
  std::string out;
  std::uint64_t mag;
  if (micros < 0) {
    out.push_back('-');
    mag = static_cast<std::uint64_t>(-(micros + 1)) + 1;
  } else {
    mag = static_cast<std::uint64_t>(micros);
  }
  out += std::to_string(mag / 1000000);
  out.push_back('.');
  std::string frac = std::to_string(mag % 1000000);
  out.append(6 - frac.size(), '0');
  out += frac;
  return out;
}

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = first + token.size();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

bool parse_micros(std::string_view token, std::int64_t& out) {
  if (token.empty()) return false;
  bool negative = false;
  if (token.front() == '-' || token.front() == '+') {
    negative = token.front() == '-';
    token.remove_prefix(1);
  }
  auto dot = token.find('.');
  std::string_view whole = token.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : token.substr(dot + 1);
  if (whole.empty() || frac.size() > 6 || (dot != std::string_view::npos && frac.empty())) return false;
  std::int64_t w = 0;
  auto r1 = std::from_chars(whole.data(), whole.data() + whole.size(), w);
  if (r1.ec != std::errc() || r1.ptr != whole.data() + whole.size()) return false;
  std::int64_t f = 0;
  if (!frac.empty()) {
    for (char c : frac) {
      if (c < '0' || c > '9') return false;
    }
    std::from_chars(frac.data(), frac.data() + frac.size(), f);
    for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
  }
  if (w > 9'000'000'000'000) return false;
  std::int64_t v = w * 1000000 + f;
  out = negative ? -v : v;
  return true;
}

std::int64_t seconds_to_micros(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e6));
}

double micros_to_seconds(std::int64_t micros) { return static_cast<double>(micros) / 1e6; }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace navkit::text

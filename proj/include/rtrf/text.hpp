#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "rtrf/error.hpp"

namespace rtrf::text {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

// Splits a line on whitespace, dropping everything from the first '#'.
inline std::vector<Token> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = s.find(sep, pos);
    out.push_back(s.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

template <class Int>
bool parse_int(std::string_view s, Int& out, int base = 10) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::uint64_t require_hex(std::string_view s, std::size_t line, std::size_t column, const char* what) {
  std::uint64_t v = 0;
  if (!parse_int(s, v, 16)) throw ParseError(line, column, std::string("bad hex ") + what + " '" + std::string(s) + "'");
  return v;
}

inline std::int64_t require_dec(std::string_view s, std::size_t line, std::size_t column, const char* what) {
  std::int64_t v = 0;
  if (!parse_int(s, v, 10)) throw ParseError(line, column, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

inline std::string hex(std::uint64_t v) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
  return std::string(buf, ptr);
}

// Reads all lines, invoking fn(line_number, line).
template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) fn(++n, std::string_view(line));
}

}  // namespace rtrf::text

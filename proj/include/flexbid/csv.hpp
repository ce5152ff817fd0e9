#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flexbid/errors.hpp"

namespace flexbid::csv {

// Minimal reader for the comma-separated, unquoted files this project
// exchanges. Fields never contain commas, so no quoting support.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Reads the header row and checks it against the expected column list.
  void expect_header(std::string_view expected) {
    std::string line;
    if (!next_line(line)) throw MalformedRow(source_, 1, "missing header");
    if (line != expected)
      throw MalformedRow(source_, line_, "header '" + line + "' does not match '" + std::string(expected) + "'");
  }

  // Returns false at end of input. Blank lines are skipped.
  bool next(std::vector<std::string_view>& fields) {
    while (next_line(current_)) {
      if (current_.empty()) continue;
      fields.clear();
      std::string_view rest(current_);
      while (true) {
        auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

  [[noreturn]] void fail(const std::string& why) const { throw MalformedRow(source_, line_, why); }

  double number(std::string_view field, const char* name) const {
    double v{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
      fail(std::string("column ") + name + ": not a finite number '" + std::string(field) + "'");
    return v;
  }

 private:
  bool next_line(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (line_ == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::istream& in_;
  std::string source_;
  std::string current_;
  std::size_t line_{0};
};

// Shortest round-trip representation, so CSV output re-ingests bit-exactly
// and stays byte-stable between runs.
inline std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Fixed-precision output for report columns.
inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos) s = s.front() == '-' ? s.substr(1) : s;
  return s;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path);
  return in;
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path);
  out << contents;
  if (!out) throw IoError(path);
}

}  // namespace flexbid::csv

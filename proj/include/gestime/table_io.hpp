#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gestime/error.hpp"

namespace gestime {

inline std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(delim, pos);
    out.emplace_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// A header-first delimited text file. Columns are addressed by name; every
// conversion failure reports "<file>:<line>: column '<name>': ..." so the
// caller can point at the offending cell.
class Table {
 public:
  struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
  };

  static Table parse(std::istream& in, std::string source, char delim,
                     const std::vector<std::string>& required) {
    Table t;
    t.source_ = std::move(source);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!have_header) {
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        for (auto& f : split_fields(line, delim)) t.header_.emplace_back(trim(f));
        have_header = true;
        for (const auto& name : required) {
          if (t.column_index(name) == npos) {
            throw InputFormatError(t.source_ + ":1: header is missing column '" + name + "'");
          }
        }
        continue;
      }
      if (trim(line).empty()) continue;
      Row row{line_no, split_fields(line, delim)};
      if (row.fields.size() != t.header_.size()) {
        throw InputFormatError(t.source_ + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(t.header_.size()) + " fields, found " +
                               std::to_string(row.fields.size()));
      }
      for (auto& f : row.fields) f = std::string(trim(f));
      t.rows_.push_back(std::move(row));
    }
    if (!have_header) throw InputFormatError(t.source_ + ":1: empty file, header row expected");
    return t;
  }

  static Table read(const std::string& path, char delim, const std::vector<std::string>& required) {
    std::ifstream in(path);
    if (!in) throw InputFormatError(path + ": cannot open file");
    return parse(in, path, delim, required);
  }

  const std::vector<Row>& rows() const { return rows_; }
  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t column_index(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == name) return i;
    }
    return npos;
  }

  const std::string& text(const Row& row, std::string_view column) const {
    const std::size_t i = column_index(column);
    if (i == npos) fail(row, column, "no such column");
    return row.fields[i];
  }

  std::int64_t integer(const Row& row, std::string_view column) const {
    const std::string& s = text(row, column);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(row, column, "expected an integer, got '" + s + "'");
    return v;
  }

  double real(const Row& row, std::string_view column) const {
    const std::string& s = text(row, column);
    if (s.empty()) fail(row, column, "expected a number, got an empty field");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      fail(row, column, "expected a number, got '" + s + "'");
    }
    if (used != s.size()) fail(row, column, "expected a number, got '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const Row& row, std::string_view column, const std::string& what) const {
    throw InputFormatError(source_ + ":" + std::to_string(row.line) + ": column '" +
                           std::string(column) + "': " + what);
  }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

// Shortest decimal text that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace gestime

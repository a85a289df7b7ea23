#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/table_io.hpp"

namespace gestime {

// Ordered "key = value" text file. Blank lines and '#' comments are ignored.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, const std::string& source) {
    KeyValueFile kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string_view body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw InputFormatError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string key(trim(body.substr(0, eq)));
      if (key.empty()) throw InputFormatError(source + ":" + std::to_string(line_no) + ": empty key");
      kv.set(key, std::string(trim(body.substr(eq + 1))));
    }
    return kv;
  }

  static KeyValueFile read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputFormatError(path + ": cannot open file");
    return parse(in, path);
  }

  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries_.emplace_back(key, std::move(value));
  }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  bool has(const std::string& key) const { return get(key).has_value(); }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
  }

  std::int64_t integer(const std::string& key) const {
    const std::string s = require(key);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("key '" + key + "': expected an integer");
    return v;
  }

  double real(const std::string& key) const {
    const std::string s = require(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("key '" + key + "': expected a number");
    return v;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string format() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
    return os.str();
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace gestime

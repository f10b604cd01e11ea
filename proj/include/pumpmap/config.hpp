// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "pumpmap/common.hpp"

namespace pumpmap {

// Nested key/value configuration text.
//
// Format: one `key = value` per line, `#` starts a comment, blank lines are
// ignored. A `[section]` header prefixes following keys with `section.`.
// Keys carry their units as suffixes (`*_mm`, `*_ghz`, ...). Values are
// free-form strings interpreted on access.
class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string s = trim(line);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
      std::string key = trim(s.substr(0, eq));
      std::string value = trim(s.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (!section.empty()) key = section + "." + key;
      cfg.kv_[key] = value;
    }
    return cfg;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  void set(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    kv_[key] = os.str();
  }

  std::string get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }
  double get_double(const std::string& key, double dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : parse_double(key, it->second);
  }

  long get_int(const std::string& key, long dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    try {
      size_t pos = 0;
      long v = std::stol(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key `" + key + "`: not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key `" + key + "`: not a boolean: " + it->second);
  }

  // Canonical serialization (sorted keys); this is what gets digested for
  // provenance, so it is insensitive to comments and key order.
  std::string canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << "=" << v << "\n";
    return os.str();
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  static std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static double parse_double(const std::string& key, const std::string& v) {
    try {
      size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config key `" + key + "`: not a number: " + v);
    }
  }

  std::map<std::string, std::string> kv_;
};

} // namespace pumpmap

#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rbflow/io_util.hpp"

namespace rbflow {

/// Flat key/value run configuration. One `key = value` pair per line, keys
/// are dotted identifiers, `#` starts a comment. Values: true/false, a
/// number, a "quoted string", or a [v1, v2, ...] list of numbers.
class ConfigMap {
 public:
  using Value = std::variant<bool, double, std::string, std::vector<double>>;

  static ConfigMap parse(const std::string& text) {
    ConfigMap cfg;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t eol = text.find('\n', pos);
      std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
      pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
      ++lineno;
      strip_comment(line);
      trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
      }
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      trim(key);
      trim(value);
      if (key.empty() || !valid_key(key)) {
        throw ParseError("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
      }
      if (cfg.values_.count(key) != 0) {
        throw ParseError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                         "'");
      }
      cfg.values_[key] = parse_value(value, lineno);
    }
    return cfg;
  }

  static ConfigMap parse_file(const std::string& path) { return parse(read_file(path)); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touch(key);
    if (const double* v = std::get_if<double>(&it->second)) return *v;
    throw ConfigError("config key '" + key + "' must be a number");
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const auto rounded = static_cast<std::int64_t>(v);
    if (static_cast<double>(rounded) != v) {
      throw ConfigError("config key '" + key + "' must be an integer");
    }
    return rounded;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touch(key);
    if (const bool* v = std::get_if<bool>(&it->second)) return *v;
    throw ConfigError("config key '" + key + "' must be true or false");
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touch(key);
    if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
    throw ConfigError("config key '" + key + "' must be a quoted string");
  }

  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    touch(key);
    if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
    throw ConfigError("config key '" + key + "' must be a [ ... ] list");
  }

  void set_double(const std::string& key, double v) { values_[key] = v; }

  /// Keys present in the file but never read by the loader; catches typos.
  std::vector<std::string> unread_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
      if (read_.count(key) == 0) out.push_back(key);
    }
    return out;
  }

  /// FNV-1a over the canonical sorted key=value text, hex encoded. Computed
  /// after any environment override, so the hash names the effective config.
  std::string hash() const {
    std::string canon;
    for (const auto& [key, value] : values_) {
      canon += key;
      canon += '=';
      canon += canonical(value);
      canon += '\n';
    }
    return hex64(fnv1a(canon));
  }

 private:
  static void trim(std::string& s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    s.erase(0, i);
  }

  static void strip_comment(std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        return;
      }
    }
  }

  static bool valid_key(const std::string& key) {
    for (char c : key) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
    }
    return true;
  }

  static double parse_number(const std::string& s, std::size_t lineno) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError("config line " + std::to_string(lineno) + ": bad number '" + s + "'");
    }
  }

  static Value parse_value(const std::string& raw, std::size_t lineno) {
    if (raw.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty value");
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') {
        throw ParseError("config line " + std::to_string(lineno) + ": unterminated string");
      }
      return raw.substr(1, raw.size() - 2);
    }
    if (raw.front() == '[') {
      if (raw.back() != ']') {
        throw ParseError("config line " + std::to_string(lineno) + ": unterminated list");
      }
      std::vector<double> items;
      std::string body = raw.substr(1, raw.size() - 2);
      std::size_t start = 0;
      while (start <= body.size()) {
        std::size_t comma = body.find(',', start);
        std::string item = body.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        trim(item);
        if (!item.empty()) items.push_back(parse_number(item, lineno));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return items;
    }
    return parse_number(raw, lineno);
  }

  static std::string canonical(const Value& v) {
    if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (const double* d = std::get_if<double>(&v)) return format_double(*d);
    if (const std::string* s = std::get_if<std::string>(&v)) return '"' + *s + '"';
    const auto& list = std::get<std::vector<double>>(v);
    std::string out = "[";
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i != 0) out += ',';
      out += format_double(list[i]);
    }
    return out + "]";
  }

  void touch(const std::string& key) const { read_.insert(key); }

  std::map<std::string, Value> values_;
  mutable std::set<std::string> read_;
};

/// RBF_SEED in the environment overrides the config-file seed.
inline void apply_seed_override(ConfigMap& cfg) {
  if (const char* env = std::getenv("RBF_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      cfg.set_double("seed", static_cast<double>(v));
    } catch (const std::exception&) {
      throw ConfigError(std::string("RBF_SEED is not an unsigned integer: ") + env);
    }
  }
}

}  // namespace rbflow

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace arcscan {

// Flat key=value configuration with '#' comments. Values stay strings
// until a typed getter pulls them; getters track which keys were consumed
// so unknown (misspelled) keys can be rejected afterwards.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path);
  }

  static Config from_text(const std::string& text, const std::string& origin = "<text>") {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                 ": expected key=value, got '" + trimmed + "'");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    touch(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    touch(key);
    const auto it = values_.find(key);
    if (it == values_.end())
      throw std::runtime_error(origin_ + ": missing required config key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    touch(key);
    if (it == values_.end()) return fallback;
    return parse_double(key, it->second);
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    touch(key);
    if (it == values_.end()) return fallback;
    return parse_int(key, it->second);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    touch(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stoull(it->second);
    } catch (...) {
      throw std::runtime_error(origin_ + ": key '" + key + "' is not an unsigned integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    touch(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error(origin_ + ": key '" + key + "' must be true/false");
  }

  std::vector<long long> get_int_list(const std::string& key,
                                      std::vector<long long> fallback = {}) const {
    const auto it = values_.find(key);
    touch(key);
    if (it == values_.end()) return fallback;
    std::vector<long long> out;
    for (const std::string& tok : split_csv(it->second)) out.push_back(parse_int(key, tok));
    return out;
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback = {}) const {
    const auto it = values_.find(key);
    touch(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const std::string& tok : split_csv(it->second)) out.push_back(parse_double(key, tok));
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key,
                                           std::vector<std::string> fallback = {}) const {
    const auto it = values_.find(key);
    touch(key);
    if (it == values_.end()) return fallback;
    return split_csv(it->second);
  }

  // Call after all getters ran; rejects keys nothing consumed.
  void reject_unknown_keys() const {
    for (const auto& [key, value] : values_)
      if (!consumed_.count(key))
        throw std::runtime_error(origin_ + ": unknown config key '" + key + "'");
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  double parse_double(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (...) {
      throw std::runtime_error(origin_ + ": key '" + key + "' is not a number: " + v);
    }
  }

  long long parse_int(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      const long long i = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return i;
    } catch (...) {
      throw std::runtime_error(origin_ + ": key '" + key + "' is not an integer: " + v);
    }
  }

  void touch(const std::string& key) const { consumed_.insert(key); }

  std::string origin_ = "<empty>";
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace arcscan

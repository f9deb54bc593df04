#pragma once
// Line-based `key = value` experiment configs. Units are spelled out in the
// key names (ts_ms, w_khz, pmax_dbm, ...) so files stay unambiguous.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace edgetwin {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is) {
    KeyValueConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
      }
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static KeyValueConfig parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw ConfigError("");
      return v;
    } catch (...) {
      throw ConfigError("config key '" + key + "': not a number: " + it->second);
    }
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const std::int64_t v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw ConfigError("");
      return v;
    } catch (...) {
      throw ConfigError("config key '" + key + "': not an integer: " + it->second);
    }
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// "r1:r2" -> pair of nonnegative densities, at least one positive.
inline std::pair<double, double> parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("ratio must look like 5:5, got " + text);
  try {
    const double r1 = std::stod(text.substr(0, colon));
    const double r2 = std::stod(text.substr(colon + 1));
    if (r1 < 0 || r2 < 0 || r1 + r2 <= 0) throw ConfigError("");
    return {r1, r2};
  } catch (const ConfigError&) {
    throw ConfigError("invalid ratio: " + text);
  } catch (...) {
    throw ConfigError("invalid ratio: " + text);
  }
}

/// "9:1@1000" -> drift of the distribution ratio at a given epoch.
inline std::pair<std::pair<double, double>, std::int64_t> parse_drift(const std::string& text) {
  const auto at = text.find('@');
  if (at == std::string::npos) throw ConfigError("drift must look like 9:1@1000, got " + text);
  const auto ratio = parse_ratio(text.substr(0, at));
  try {
    return {ratio, std::stoll(text.substr(at + 1))};
  } catch (...) {
    throw ConfigError("invalid drift epoch in: " + text);
  }
}

inline std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace edgetwin

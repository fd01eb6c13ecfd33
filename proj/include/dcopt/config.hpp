#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dcopt/types.hpp"

namespace dcopt {

// Flat "key = value" configuration text; '#' starts a comment, blank lines
// are skipped.
using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    map[key] = value;
  }
  return map;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline double get_double(const ConfigMap& map, const std::string& key, double fallback) {
  auto it = map.find(key);
  if (it == map.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + it->second);
  }
}

inline long long get_int(const ConfigMap& map, const std::string& key, long long fallback) {
  auto it = map.find(key);
  if (it == map.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + it->second);
  }
}

inline std::uint64_t get_u64(const ConfigMap& map, const std::string& key,
                             std::uint64_t fallback) {
  auto it = map.find(key);
  if (it == map.end()) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: " + it->second);
  }
}

inline std::string get_string(const ConfigMap& map, const std::string& key,
                              const std::string& fallback) {
  auto it = map.find(key);
  return it == map.end() ? fallback : it->second;
}

template <typename T, typename Parse>
inline std::vector<T> get_list(const ConfigMap& map, const std::string& key, Parse parse) {
  std::vector<T> out;
  auto it = map.find(key);
  if (it == map.end()) return out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(parse(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad list entry: " + item);
    }
  }
  return out;
}

inline std::vector<double> get_double_list(const ConfigMap& map, const std::string& key) {
  return get_list<double>(map, key, [](const std::string& s) { return std::stod(s); });
}

inline std::vector<int> get_int_list(const ConfigMap& map, const std::string& key) {
  return get_list<int>(map, key, [](const std::string& s) { return std::stoi(s); });
}

inline std::vector<std::uint64_t> get_u64_list(const ConfigMap& map, const std::string& key) {
  return get_list<std::uint64_t>(map, key,
                                 [](const std::string& s) { return std::stoull(s); });
}

}  // namespace dcopt

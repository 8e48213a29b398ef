#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rvk/errors.hpp"

namespace rvk {

// Structured key-value configuration: INI-style sections, '#'/';' comments,
// "key = value" entries.  Values are stored as trimmed strings and converted
// on access.
struct Config {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }

  std::string get_string(const std::string& sec, const std::string& key,
                         const std::string& fallback) const {
    auto s = sections.find(sec);
    if (s == sections.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  double get_double(const std::string& sec, const std::string& key,
                    double fallback) const {
    if (!has(sec, key)) return fallback;
    return parse_double(sec, key, get_string(sec, key, ""));
  }

  int get_int(const std::string& sec, const std::string& key,
              int fallback) const {
    if (!has(sec, key)) return fallback;
    const std::string v = get_string(sec, key, "");
    std::size_t pos = 0;
    int out = 0;
    try {
      out = std::stoi(v, &pos);
    } catch (const std::exception&) {
      throw ConfigError("config [" + sec + "] " + key +
                        ": not an integer: " + v);
    }
    if (pos != v.size())
      throw ConfigError("config [" + sec + "] " + key +
                        ": trailing characters in integer: " + v);
    return out;
  }

  bool get_bool(const std::string& sec, const std::string& key,
                bool fallback) const {
    if (!has(sec, key)) return fallback;
    const std::string v = get_string(sec, key, "");
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config [" + sec + "] " + key + ": not a boolean: " + v);
  }

  // Comma- or whitespace-separated list of reals.
  std::vector<double> get_doubles(const std::string& sec,
                                  const std::string& key) const {
    std::vector<double> out;
    std::string v = get_string(sec, key, "");
    for (char& ch : v)
      if (ch == ',') ch = ' ';
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(sec, key, tok));
    return out;
  }

 private:
  static double parse_double(const std::string& sec, const std::string& key,
                             const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      throw ConfigError("config [" + sec + "] " + key +
                        ": not a number: " + v);
    }
    if (pos != v.size())
      throw ConfigError("config [" + sec + "] " + key +
                        ": trailing characters in number: " + v);
    return out;
  }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace config_detail

inline Config parse_config(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = config_detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = config_detail::trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty section name");
      cfg.sections[section];
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside any section");
    std::string key = config_detail::trim(t.substr(0, eq));
    std::string val = config_detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    cfg.sections[section][key] = val;
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace rvk

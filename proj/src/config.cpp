#include "gse/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gse {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("config parse error (" + origin + ":" + std::to_string(lineno) +
                             "): " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.kv_.count(full)) fail("duplicate key '" + full + "'");
    cfg.kv_[full] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  size_t pos = 0;
  double v;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
  }
  if (pos != it->second.size())
    throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, fallback);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  return i;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean: " + v);
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  const auto it = kv_.find(key);
  if (it == kv_.end()) return out;
  std::string s = it->second;
  for (auto& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' has a non-numeric entry: " + tok);
    }
  }
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const double v : get_list(key)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw std::runtime_error("config: key '" + key + "' has a non-integer entry");
    out.push_back(i);
  }
  return out;
}

}  // namespace gse

#pragma once

#include <map>
#include <string>
#include <vector>

namespace gse {

/// Line-oriented `key = value` configuration with `[section]` headers.
/// Keys are addressed as "section.key"; keys before any section header are
/// addressed bare. `#` starts a comment. Parse errors carry line numbers.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Whitespace- or comma-separated numeric list; empty when the key is absent.
  std::vector<double> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace gse

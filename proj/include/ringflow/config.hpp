#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ringflow/errors.hpp"

namespace ringflow {

/// Strict sectioned key = value document. '#' and ';' start comments,
/// values may be scalars or comma-separated lists. Unknown keys are hard
/// errors, surfaced with line numbers once parsing users have declared what
/// they consume.
class ConfigDoc {
 public:
  static ConfigDoc parse_file(const std::string& path);
  static ConfigDoc parse_string(const std::string& text,
                                const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  /// Required variant: throws ConfigError when missing.
  double require_double(const std::string& section,
                        const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;

  /// Throws ConfigError naming every key nobody consumed (typo guard).
  void reject_unconsumed() const;

  /// FNV-1a over the canonicalized (sorted) section/key/value content.
  std::string content_hash() const;

 private:
  struct Value {
    std::string text;
    int line = 0;
    mutable bool consumed = false;
  };
  const Value* find(const std::string& section, const std::string& key) const;
  const Value& require(const std::string& section,
                       const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::map<std::string, Value>> sections_;
};

}  // namespace ringflow

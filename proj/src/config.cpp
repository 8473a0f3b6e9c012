#include "ringflow/config.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ringflow {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

ConfigDoc ConfigDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

ConfigDoc ConfigDoc::parse_string(const std::string& text,
                                  const std::string& origin) {
  ConfigDoc doc;
  doc.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      }
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": empty section name");
      }
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty key");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside any [section]");
    }
    auto [it, inserted] =
        doc.sections_[section].emplace(key, Value{value, lineno, false});
    if (!inserted) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "' in [" + section + "]");
    }
  }
  return doc;
}

const ConfigDoc::Value* ConfigDoc::find(const std::string& section,
                                        const std::string& key) const {
  const auto sit = sections_.find(lower(section));
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(lower(key));
  if (kit == sit->second.end()) return nullptr;
  kit->second.consumed = true;
  return &kit->second;
}

const ConfigDoc::Value& ConfigDoc::require(const std::string& section,
                                           const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) {
    throw ConfigError(origin_ + ": missing required key '" + key +
                      "' in section [" + section + "]");
  }
  return *v;
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigDoc::get_string(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) const {
  const Value* v = find(section, key);
  return v ? v->text : fallback;
}

namespace {
double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing text");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse number '" + text + "'");
  }
}
}  // namespace

double ConfigDoc::get_double(const std::string& section,
                             const std::string& key, double fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  return parse_double(v->text,
                      origin_ + ":" + std::to_string(v->line) + " " + key);
}

double ConfigDoc::require_double(const std::string& section,
                                 const std::string& key) const {
  const Value& v = require(section, key);
  return parse_double(v.text,
                      origin_ + ":" + std::to_string(v.line) + " " + key);
}

long long ConfigDoc::get_int(const std::string& section,
                             const std::string& key, long long fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const long long value = std::stoll(v->text, &pos);
    if (pos != v->text.size()) throw std::invalid_argument("trailing text");
    return value;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(v->line) +
                      ": cannot parse integer '" + v->text + "'");
  }
}

bool ConfigDoc::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  const std::string t = lower(v->text);
  if (t == "true" || t == "on" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "off" || t == "no" || t == "0") return false;
  throw ConfigError(origin_ + ":" + std::to_string(v->line) +
                    ": cannot parse boolean '" + v->text + "'");
}

std::vector<double> ConfigDoc::get_double_list(const std::string& section,
                                               const std::string& key) const {
  std::vector<double> out;
  for (const auto& cell : get_string_list(section, key)) {
    out.push_back(parse_double(cell, origin_ + " " + key));
  }
  return out;
}

std::vector<std::string> ConfigDoc::get_string_list(
    const std::string& section, const std::string& key) const {
  const Value* v = find(section, key);
  std::vector<std::string> out;
  if (!v) return out;
  std::stringstream ss(v->text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

void ConfigDoc::reject_unconsumed() const {
  std::vector<std::string> unknown;
  for (const auto& [section, keys] : sections_) {
    for (const auto& [key, value] : keys) {
      if (!value.consumed) {
        unknown.push_back("[" + section + "] " + key + " (line " +
                          std::to_string(value.line) + ")");
      }
    }
  }
  if (!unknown.empty()) {
    std::string msg = origin_ + ": unknown configuration keys:";
    for (const auto& u : unknown) msg += "\n  " + u;
    throw ConfigError(msg);
  }
}

std::string ConfigDoc::content_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& [section, keys] : sections_) {
    mix(section);
    for (const auto& [key, value] : keys) {
      mix(key);
      mix(value.text);
    }
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ringflow

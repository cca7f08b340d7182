#pragma once

// Flat, typed key-value configuration with sections:
//
//     # comment
//     [engine]
//     engine = qmc-sa
//     iterations = 16384
//
// Keys are addressed as "section.key". Every key must be consumed by the
// reader; leftovers are reported as unknown keys.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qmcsa/detail/format.hpp"
#include "qmcsa/errors.hpp"

namespace qmcsa {

class IniDocument {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;  // 0: command-line override
  };

  static IniDocument parse(std::istream& in, const std::string& source = "<config>") {
    IniDocument doc;
    doc.source_ = source;
    std::string section;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      auto line = detail::trim(raw);
      if (line.empty() || line.front() == '#' || line.front() == ';') continue;
      auto fail = [&](const std::string& what) {
        return ParseError(source + ":" + std::to_string(lineno) + ": " + what);
      };
      if (line.front() == '[') {
        if (line.back() != ']') throw fail("unterminated section header");
        section = std::string(detail::trim(line.substr(1, line.size() - 2)));
        if (section.empty()) throw fail("empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw fail("expected 'key = value'");
      const auto key = detail::trim(line.substr(0, eq));
      auto value = detail::trim(line.substr(eq + 1));
      if (const auto hash = value.find(" #"); hash != std::string_view::npos) value = detail::trim(value.substr(0, hash));
      if (key.empty()) throw fail("missing key");
      if (section.empty()) throw fail("key '" + std::string(key) + "' appears before any [section]");
      const std::string full = section + "." + std::string(key);
      if (doc.entries_.count(full)) throw fail("duplicate key '" + full + "'");
      doc.entries_[full] = Entry{std::string(value), lineno};
    }
    return doc;
  }

  static IniDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  /// Sets or replaces "section.key" (used for command-line overrides).
  void set(const std::string& key, const std::string& value) {
    if (key.find('.') == std::string::npos) throw ConfigError("override '" + key + "' must be section.key");
    entries_[key] = Entry{value, 0};
  }

  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
};

/// Typed accessor over an IniDocument that records which keys were read.
class ConfigReader {
 public:
  explicit ConfigReader(const IniDocument& doc) : doc_(doc) {}

  bool has(const std::string& key) const { return doc_.find(key) != nullptr; }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    const auto* e = doc_.find(key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::string require_text(const std::string& key) {
    auto v = text(key);
    if (!v) throw ConfigError(key + ": required key is missing");
    return *v;
  }

  std::optional<double> real(const std::string& key) {
    const auto v = text(key);
    if (!v) return std::nullopt;
    double x;
    if (!detail::parse_double(*v, x) || std::isnan(x)) throw error(key, "expected a number, got '" + *v + "'");
    return x;
  }

  double real_or(const std::string& key, double fallback) { return real(key).value_or(fallback); }

  std::optional<std::uint64_t> integer(const std::string& key) {
    const auto v = text(key);
    if (!v) return std::nullopt;
    std::uint64_t x;
    if (!detail::parse_integer(*v, x)) throw error(key, "expected a nonnegative integer, got '" + *v + "'");
    return x;
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto v = text(key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
    if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
    throw error(key, "expected true/false, got '" + *v + "'");
  }

  std::optional<std::vector<std::string>> list(const std::string& key) {
    const auto v = text(key);
    if (!v) return std::nullopt;
    std::vector<std::string> out;
    std::string_view rest = *v;
    while (true) {
      const auto comma = rest.find(',');
      const auto item = detail::trim(rest.substr(0, comma));
      if (item.empty()) throw error(key, "empty list element");
      out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  std::optional<std::vector<double>> real_list(const std::string& key) {
    const auto items = list(key);
    if (!items) return std::nullopt;
    std::vector<double> out;
    for (const auto& s : *items) {
      double x;
      if (!detail::parse_double(s, x) || std::isnan(x)) throw error(key, "expected numbers, got '" + s + "'");
      out.push_back(x);
    }
    return out;
  }

  /// Error tagged with the key and, when known, its line.
  ConfigError error(const std::string& key, const std::string& what) const {
    const auto* e = doc_.find(key);
    std::string where = key;
    if (e && e->line) where += " (" + doc_.source() + ":" + std::to_string(e->line) + ")";
    return ConfigError(where + ": " + what);
  }

  /// Throws on the first key that was never read.
  void reject_unknown() const {
    for (const auto& [key, entry] : doc_.entries()) {
      if (used_.count(key)) continue;
      std::string where = entry.line ? " (" + doc_.source() + ":" + std::to_string(entry.line) + ")" : "";
      throw ConfigError(key + where + ": unknown key");
    }
  }

 private:
  const IniDocument& doc_;
  std::set<std::string> used_;
};

}  // namespace qmcsa

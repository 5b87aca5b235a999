#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srf/error.hpp"

namespace srf {

/// Configuration error with a source location; line and column are 1-based, 0 when unknown.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& message, std::string file = {}, std::size_t line = 0, std::size_t column = 0);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_, file_;
  std::size_t line_, column_;
};

struct SourcePos {
  std::size_t line = 0, column = 0;
};

/// Locations of keys and values in a JSON text, addressed by JSON pointer.
class SourceMap {
 public:
  SourceMap() = default;
  explicit SourceMap(const std::string& text);
  // Position of the key for object members, of the value otherwise; falls back to the parent.
  SourcePos find(const std::string& pointer) const;

 private:
  std::map<std::string, SourcePos> pos_;
};

SourcePos offset_to_pos(const std::string& text, std::size_t offset);

struct CheckSpec {
  std::string id;
  std::string module;
  std::string op;
  nlohmann::json params = nlohmann::json::object();
  std::string pointer;  // JSON pointer of the entry, for error locations
};

/// A parsed and validated scenario file. Sections stay as JSON; the runner builds them.
struct Scenario {
  std::string path;
  std::string text;
  std::string name;
  nlohmann::json doc;
  SourceMap where;
  std::vector<CheckSpec> checks;
  std::optional<double> tolerance;
  std::optional<unsigned long long> seed;

  bool has(const std::string& section) const { return doc.contains(section); }
  const nlohmann::json& section(const std::string& name) const { return doc.at(name); }
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;
  // Directory of the scenario file, with a trailing separator, or empty.
  std::string directory() const;
};

// Parses and validates; every check must name a known module/op with well-typed params.
Scenario parse_scenario(const std::string& text, const std::string& path = "<scenario>");
Scenario load_scenario(const std::string& path);

// 64-bit FNV-1a of the bytes, as "fnv1a64:" followed by 16 hex digits.
std::string fnv1a64(const std::string& bytes);

}  // namespace srf

#include "srf/scenario.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "srf/ops.hpp"

namespace srf {

using nlohmann::json;

namespace {

std::string located(const std::string& message, const std::string& file, std::size_t line, std::size_t column) {
  std::string out = file;
  if (line > 0) out += ":" + std::to_string(line) + ":" + std::to_string(column);
  if (!out.empty()) out += ": ";
  return out + message;
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

const char* type_name(ParamType t) {
  switch (t) {
    case ParamType::Number: return "a number";
    case ParamType::Integer: return "a non-negative integer";
    case ParamType::String: return "a string";
    case ParamType::Bool: return "a boolean";
    case ParamType::Array: return "an array";
    case ParamType::Object: return "an object";
    case ParamType::Any: return "a value";
  }
  return "a value";
}

bool type_matches(ParamType t, const json& v) {
  switch (t) {
    case ParamType::Number: return v.is_number();
    case ParamType::Integer: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case ParamType::String: return v.is_string();
    case ParamType::Bool: return v.is_boolean();
    case ParamType::Array: return v.is_array();
    case ParamType::Object: return v.is_object();
    case ParamType::Any: return true;
  }
  return false;
}

const std::set<std::string> kTopLevel{"name",    "description", "seed",     "tolerance", "time_grid", "space",
                                      "measure", "generator",   "riemann",  "instance",  "checks",    "output"};

}  // namespace

ConfigError::ConfigError(const std::string& message, std::string file, std::size_t line, std::size_t column)
    : InvalidInput(located(message, file, line, column)),
      detail_(message),
      file_(std::move(file)),
      line_(line),
      column_(column) {}

SourcePos offset_to_pos(const std::string& text, std::size_t offset) {
  SourcePos p{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

SourceMap::SourceMap(const std::string& text) {
  struct Frame {
    bool object;
    std::string prefix;
    std::size_t index = 0;
    bool expect_key = true;
    std::string key;
  };
  std::vector<Frame> stack;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&] {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  // Pointer of a value starting now.
  auto value_pointer = [&]() -> std::string {
    if (stack.empty()) return "";
    auto& f = stack.back();
    return f.object ? f.prefix + "/" + escape_token(f.key) : f.prefix + "/" + std::to_string(f.index);
  };
  auto record_value = [&](const std::string& ptr) {
    if (stack.empty() || !stack.back().object) pos_.emplace(ptr, SourcePos{line, col});
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
    } else if (c == '{' || c == '[') {
      const std::string ptr = value_pointer();
      record_value(ptr);
      stack.push_back({c == '{', ptr, 0, true, {}});
      advance();
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      advance();
    } else if (c == ',') {
      if (!stack.empty()) {
        auto& f = stack.back();
        if (f.object)
          f.expect_key = true;
        else
          ++f.index;
      }
      advance();
    } else if (c == ':') {
      if (!stack.empty()) stack.back().expect_key = false;
      advance();
    } else if (c == '"') {
      const SourcePos start{line, col};
      std::string raw;
      advance();
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\\' && i + 1 < text.size()) {
          raw += text[i];
          advance();
        }
        raw += text[i];
        advance();
      }
      if (i < text.size()) advance();
      if (!stack.empty() && stack.back().object && stack.back().expect_key) {
        std::string key;
        try {
          key = json::parse("\"" + raw + "\"").get<std::string>();
        } catch (const json::exception&) {
          key = raw;
        }
        stack.back().key = key;
        pos_.emplace(stack.back().prefix + "/" + escape_token(key), start);
      } else {
        record_value(value_pointer());
      }
    } else {
      record_value(value_pointer());
      while (i < text.size() && std::string_view(" \t\r\n,]}").find(text[i]) == std::string_view::npos) advance();
    }
  }
}

SourcePos SourceMap::find(const std::string& pointer) const {
  std::string p = pointer;
  while (true) {
    auto it = pos_.find(p);
    if (it != pos_.end()) return it->second;
    const auto cut = p.rfind('/');
    if (cut == std::string::npos) return {};
    p = p.substr(0, cut);
  }
}

void Scenario::fail(const std::string& pointer, const std::string& message) const {
  const auto p = where.find(pointer);
  throw ConfigError((pointer.empty() ? "" : pointer + ": ") + message, path, p.line, p.column);
}

std::string Scenario::directory() const {
  const auto cut = path.find_last_of('/');
  return cut == std::string::npos ? "" : path.substr(0, cut + 1);
}

Scenario parse_scenario(const std::string& text, const std::string& path) {
  Scenario sc;
  sc.path = path;
  sc.text = text;
  try {
    sc.doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto p = offset_to_pos(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // Drop the library prefix "[json.exception.parse_error.101] parse error at line L, column C: ".
    if (auto colon = msg.find(": "); colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ConfigError("malformed JSON: " + msg, path, p.line, p.column);
  }
  sc.where = SourceMap(text);
  if (!sc.doc.is_object()) sc.fail("", "scenario must be a JSON object");
  for (const auto& [key, value] : sc.doc.items())
    if (!kTopLevel.count(key)) sc.fail("/" + escape_token(key), "unknown key '" + key + "'");

  if (sc.doc.contains("name")) {
    if (!sc.doc["name"].is_string()) sc.fail("/name", "name must be a string");
    sc.name = sc.doc["name"].get<std::string>();
  }
  if (sc.doc.contains("description") && !sc.doc["description"].is_string())
    sc.fail("/description", "description must be a string");
  if (sc.doc.contains("tolerance")) {
    if (!sc.doc["tolerance"].is_number() || sc.doc["tolerance"].get<double>() < 0)
      sc.fail("/tolerance", "tolerance must be a non-negative number");
    sc.tolerance = sc.doc["tolerance"].get<double>();
  }
  if (sc.doc.contains("seed")) {
    if (!sc.doc["seed"].is_number_unsigned()) sc.fail("/seed", "seed must be a non-negative integer");
    sc.seed = sc.doc["seed"].get<unsigned long long>();
  }
  if (sc.doc.contains("output")) {
    const auto& out = sc.doc["output"];
    if (!out.is_object()) sc.fail("/output", "output must be an object");
    for (const auto& [key, value] : out.items()) {
      if (key != "json" && key != "csv") sc.fail("/output/" + escape_token(key), "unknown key '" + key + "'");
      if (!value.is_string()) sc.fail("/output/" + key, "output path must be a string");
    }
  }
  for (const char* s : {"time_grid", "space", "measure", "generator", "riemann", "instance"})
    if (sc.doc.contains(s)) validate_section(sc, s);

  if (sc.doc.contains("checks")) {
    const auto& checks = sc.doc["checks"];
    if (!checks.is_array()) sc.fail("/checks", "checks must be an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const std::string ptr = "/checks/" + std::to_string(i);
      const auto& c = checks[i];
      if (!c.is_object()) sc.fail(ptr, "check must be an object");
      for (const auto& [key, value] : c.items())
        if (key != "id" && key != "module" && key != "op" && key != "params")
          sc.fail(ptr + "/" + escape_token(key), "unknown key '" + key + "'");
      for (const char* k : {"module", "op"}) {
        if (!c.contains(k)) sc.fail(ptr, std::string("check needs '") + k + "'");
        if (!c[k].is_string()) sc.fail(ptr + "/" + k, std::string(k) + " must be a string");
      }
      CheckSpec spec;
      spec.pointer = ptr;
      spec.module = c["module"].get<std::string>();
      spec.op = c["op"].get<std::string>();
      spec.id = spec.module + "." + spec.op + "#" + std::to_string(i);
      if (c.contains("id")) {
        if (!c["id"].is_string() || c["id"].get<std::string>().empty()) sc.fail(ptr + "/id", "id must be a non-empty string");
        spec.id = c["id"].get<std::string>();
      }
      if (!ids.insert(spec.id).second) sc.fail(ptr + "/id", "duplicate check id '" + spec.id + "'");
      const OpSignature* sig = find_op(spec.module, spec.op);
      if (!sig) {
        if (!is_known_module(spec.module)) sc.fail(ptr + "/module", "unknown module '" + spec.module + "'");
        sc.fail(ptr + "/op", "unknown op '" + spec.op + "' in module '" + spec.module + "'");
      }
      if (c.contains("params")) {
        if (!c["params"].is_object()) sc.fail(ptr + "/params", "params must be an object");
        spec.params = c["params"];
      }
      for (const auto& [key, value] : spec.params.items()) {
        const ParamSpec* p = nullptr;
        for (const auto& q : sig->params)
          if (q.name == key) p = &q;
        const std::string pp = ptr + "/params/" + escape_token(key);
        if (!p) sc.fail(pp, "unknown parameter '" + key + "' for " + spec.module + "." + spec.op);
        if (!type_matches(p->type, value)) sc.fail(pp, "parameter '" + key + "' must be " + type_name(p->type));
      }
      for (const auto& q : sig->params)
        if (q.required && !spec.params.contains(q.name))
          sc.fail(ptr, spec.module + "." + spec.op + " needs parameter '" + q.name + "'");
      for (const auto& s : sig->sections)
        if (!sc.doc.contains(s)) sc.fail(ptr, spec.module + "." + spec.op + " needs a '" + s + "' section");
      sc.checks.push_back(std::move(spec));
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

}  // namespace srf

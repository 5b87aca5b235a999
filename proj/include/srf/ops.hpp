#pragma once

#include <string>
#include <vector>

namespace srf {

struct Scenario;

enum class ParamType { Number, Integer, String, Bool, Array, Object, Any };

struct ParamSpec {
  std::string name;
  ParamType type;
  bool required = false;
};

/// Signature of a scenario check: its parameters and the scenario sections it reads.
struct OpSignature {
  std::string module;
  std::string op;
  std::vector<ParamSpec> params;
  std::vector<std::string> sections;
};

const std::vector<OpSignature>& all_ops();
const OpSignature* find_op(const std::string& module, const std::string& op);
bool is_known_module(const std::string& module);

// Key and type validation of an instance section; throws ConfigError.
void validate_section(const Scenario& sc, const std::string& section);

}  // namespace srf

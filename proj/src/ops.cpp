#include "srf/ops.hpp"

#include <map>
#include <set>

#include "srf/scenario.hpp"

namespace srf {

using nlohmann::json;

namespace {

using P = ParamType;

std::vector<ParamSpec> with(std::vector<ParamSpec> base, const std::vector<ParamSpec>& extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

const std::vector<ParamSpec> kFlow{{"times", P::Any},         {"corpus", P::Any},       {"dirac_pairs", P::Integer},
                                   {"tau_intervals", P::Integer}, {"geodesic_cap", P::Integer}, {"tol", P::Number}};
const std::vector<ParamSpec> kTensor{{"times", P::Array}, {"per_axis", P::Integer}, {"margin", P::Number},
                                     {"points", P::Array}, {"tol", P::Number}};
const std::vector<ParamSpec> kGradient{{"pairs", P::Any}, {"tests", P::Any}, {"tol", P::Number}};

std::vector<OpSignature> build_table() {
  return {
      {"convexity1d", "k_convex", {{"tau", P::Array, true}, {"values", P::Array, true}, {"K", P::Number, true},
                                   {"N", P::Number}, {"tol", P::Number}}, {}},
      {"tgs", "controls", {}, {"space"}},
      {"dynconv", "dynamic_convexity", {{"t", P::Integer, true}, {"form", P::String, true}, {"potential", P::Any},
                                        {"N", P::Number}, {"lambda", P::Number}, {"pairs", P::Array},
                                        {"path_cap", P::Integer}, {"tol", P::Number}}, {"space"}},
      {"transport", "wasserstein", {{"t", P::Integer, true}, {"mu0", P::Any, true}, {"mu1", P::Any, true}},
       {"space"}},
      {"srfcheck", "super_ricci_strong", kFlow, {"space"}},
      {"srfcheck", "super_ricci_moderate", with(kFlow, {{"lambda", P::Any, true}}), {"space"}},
      {"srfcheck", "super_n_ricci", with(kFlow, {{"N", P::Number, true}, {"lambda", P::Any}}), {"space"}},
      {"srfcheck", "averaged_flow", with(kFlow, {{"r", P::Integer, true}, {"s", P::Integer, true},
                                                 {"N", P::Number, true}, {"lambda", P::Any, true}}), {"space"}},
      {"riemann", "srf_tensor", kTensor, {"riemann"}},
      {"riemann", "sub_rf_tensor", kTensor, {"riemann"}},
      {"riemann", "n_srf_tensor", with(kTensor, {{"N", P::Number, true}}), {"riemann"}},
      {"riemann", "weight_identity", with(kTensor, {{"t_ref", P::Number}}), {"riemann"}},
      {"riemann", "distance_expansion", {{"potential", P::String, true}, {"x", P::Array, true},
                                         {"y", P::Array, true}, {"substeps", P::Integer}, {"tol", P::Number}},
       {"riemann", "time_grid"}},
      {"riemann", "evi", {{"potential", P::String, true}, {"x", P::Array, true}, {"comparisons", P::Array, true},
                          {"substeps", P::Integer}, {"geodesic_samples", P::Integer}, {"tol", P::Number}},
       {"riemann", "time_grid"}},
      {"gammacalc", "srf_gamma", {{"times", P::Any}, {"N", P::Number}, {"tol", P::Number}}, {"generator"}},
      {"gammacalc", "gradient_estimate", with(kGradient, {{"witness", P::Bool}}), {"generator"}},
      {"gammacalc", "n_gradient_estimate", with(kGradient, {{"N", P::Number, true}}), {"generator"}},
      {"gammacalc", "propagator", {{"s", P::Integer, true}, {"t", P::Integer, true}, {"substeps", P::Integer}},
       {"generator"}},
      {"ddi", "ddi", {{"other", P::String, true}, {"rounds", P::Integer}, {"reference_time", P::Number}}, {}},
      {"ddi", "slice_bound", {{"other", P::String, true}, {"s", P::Any}, {"lipschitz", P::Number},
                              {"rounds", P::Integer}}, {}},
  };
}

struct KeySpec {
  ParamType type;
  bool required = false;
};

using SectionSpec = std::map<std::string, KeySpec>;

const std::map<std::string, SectionSpec>& section_specs() {
  static const std::map<std::string, SectionSpec> specs{
      {"time_grid", {{"times", {P::Array}}, {"first", {P::Number}}, {"last", {P::Number}}, {"intervals", {P::Integer}}}},
      {"space", {{"kind", {P::String, true}}, {"vertices", {P::Integer}}, {"circumference", {P::Number}},
                 {"length", {P::Number}}, {"scale", {P::String}}, {"path", {P::String}},
                 {"reparametrize_K", {P::Number}}}},
      {"measure", {{"reference", {P::Any}}, {"weights", {P::Any}}}},
      {"generator", {{"kind", {P::String, true}}, {"states", {P::Integer}}, {"circumference", {P::Number}},
                     {"scale", {P::String}}, {"matrices", {P::Array}}, {"markov", {P::Bool}}}},
      {"riemann", {{"family", {P::String, true}}, {"dim", {P::Integer}}, {"chart", {P::Object, true}},
                   {"rate", {P::Number}}, {"weight", {P::String}}, {"metric", {P::Array}}, {"samples", {P::Object}}}},
      {"instance", {{"distances", {P::Array, true}}, {"weights", {P::Array}}, {"base", {P::Array, true}}}},
  };
  return specs;
}

bool matches(ParamType t, const json& v) {
  switch (t) {
    case P::Number: return v.is_number();
    case P::Integer: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case P::String: return v.is_string();
    case P::Bool: return v.is_boolean();
    case P::Array: return v.is_array();
    case P::Object: return v.is_object();
    case P::Any: return true;
  }
  return false;
}

void check_keys(const Scenario& sc, const std::string& ptr, const json& obj,
                const std::map<std::string, KeySpec>& spec) {
  if (!obj.is_object()) sc.fail(ptr, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    auto it = spec.find(key);
    if (it == spec.end()) sc.fail(ptr + "/" + key, "unknown key '" + key + "'");
    if (!matches(it->second.type, value)) sc.fail(ptr + "/" + key, "'" + key + "' has the wrong type");
  }
  for (const auto& [key, ks] : spec)
    if (ks.required && !obj.contains(key)) sc.fail(ptr, "missing key '" + key + "'");
}

}  // namespace

const std::vector<OpSignature>& all_ops() {
  static const std::vector<OpSignature> table = build_table();
  return table;
}

const OpSignature* find_op(const std::string& module, const std::string& op) {
  for (const auto& s : all_ops())
    if (s.module == module && s.op == op) return &s;
  return nullptr;
}

bool is_known_module(const std::string& module) {
  for (const auto& s : all_ops())
    if (s.module == module) return true;
  return false;
}

void validate_section(const Scenario& sc, const std::string& section) {
  const auto& specs = section_specs();
  auto it = specs.find(section);
  if (it == specs.end()) sc.fail("/" + section, "unknown section");
  const std::string ptr = "/" + section;
  const json& obj = sc.section(section);
  check_keys(sc, ptr, obj, it->second);
  if (section == "riemann") {
    check_keys(sc, ptr + "/chart", obj["chart"], {{"lo", {P::Array, true}}, {"hi", {P::Array, true}}});
    if (obj.contains("samples"))
      check_keys(sc, ptr + "/samples", obj["samples"],
                 {{"times", {P::Array}}, {"per_axis", {P::Integer}}, {"margin", {P::Number}}});
  }
  if (section == "time_grid") {
    const bool listed = obj.contains("times");
    const bool uniform = obj.contains("first") || obj.contains("last") || obj.contains("intervals");
    if (listed == uniform) sc.fail(ptr, "give either 'times' or 'first', 'last' and 'intervals'");
    if (uniform && !(obj.contains("first") && obj.contains("last") && obj.contains("intervals")))
      sc.fail(ptr, "a uniform grid needs 'first', 'last' and 'intervals'");
  }
}

}  // namespace srf

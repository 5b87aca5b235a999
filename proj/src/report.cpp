#include "srf/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "srf/error.hpp"

namespace srf {

using nlohmann::ordered_json;

namespace {

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double read_number(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

ordered_json sample_json(const SlackSample& s) {
  ordered_json o;
  o["t"] = number(s.t);
  o["pair_id"] = s.pair_id;
  o["tau"] = s.tau ? number(*s.tau) : ordered_json(nullptr);
  o["slack"] = number(s.slack);
  return o;
}

SlackSample sample_from(const ordered_json& j) {
  SlackSample s;
  s.t = read_number(j.at("t"));
  s.pair_id = j.at("pair_id").get<std::size_t>();
  if (!j.at("tau").is_null()) s.tau = j.at("tau").get<double>();
  s.slack = read_number(j.at("slack"));
  return s;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Undetermined: return "undetermined";
    case CheckStatus::Error: return "error";
  }
  return "error";
}

CheckStatus parse_check_status(const std::string& s) {
  for (auto c : {CheckStatus::Pass, CheckStatus::Fail, CheckStatus::Undetermined, CheckStatus::Error})
    if (to_string(c) == s) return c;
  throw InvalidInput("unknown check status '" + s + "'");
}

int ReportDocument::exit_code() const {
  bool config = false, numerical = false, violation = false;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Error) (c.error_kind == "config" ? config : numerical) = true;
    if (c.status == CheckStatus::Undetermined) numerical = true;
    if (c.status == CheckStatus::Fail) violation = true;
  }
  return config ? 2 : numerical ? 3 : violation ? 1 : 0;
}

ordered_json to_json(const ReportDocument& r) {
  ordered_json o;
  o["schema_version"] = r.schema_version;
  o["tool"] = r.tool;
  o["version"] = r.version;
  o["command"] = r.command;
  o["inputs"] = r.inputs;
  o["scenario_hash"] = r.scenario_hash;
  o["seed"] = r.seed;
  o["tolerance_override"] = r.tolerance_override ? number(*r.tolerance_override) : ordered_json(nullptr);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& c : r.checks) ++counts[static_cast<int>(c.status)];
  ordered_json summary;
  summary["total"] = r.checks.size();
  summary["pass"] = counts[0];
  summary["fail"] = counts[1];
  summary["undetermined"] = counts[2];
  summary["error"] = counts[3];
  summary["exit_code"] = r.exit_code();
  o["summary"] = summary;
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks) {
    ordered_json k;
    k["id"] = c.id;
    k["module"] = c.module;
    k["op"] = c.op;
    k["status"] = to_string(c.status);
    if (c.status == CheckStatus::Error) {
      k["error"] = {{"kind", c.error_kind}, {"message", c.message}};
    }
    k["min_slack"] = c.min_slack ? number(*c.min_slack) : ordered_json(nullptr);
    k["tolerance"] = number(c.tolerance);
    k["witness"] = c.witness ? sample_json(*c.witness) : ordered_json(nullptr);
    k["values"] = c.values;
    k["notes"] = c.notes;
    if (c.elapsed_ms) k["elapsed_ms"] = *c.elapsed_ms;
    ordered_json samples = ordered_json::array();
    for (const auto& s : c.samples) samples.push_back(sample_json(s));
    k["samples"] = std::move(samples);
    checks.push_back(std::move(k));
  }
  o["checks"] = std::move(checks);
  return o;
}

ReportDocument parse_report(const std::string& text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    ReportDocument r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      throw InvalidInput("unsupported report schema version " + std::to_string(r.schema_version));
    r.tool = j.at("tool").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.inputs = j.at("inputs").get<std::vector<std::string>>();
    r.scenario_hash = j.at("scenario_hash").get<std::string>();
    r.seed = j.at("seed").get<unsigned long long>();
    if (!j.at("tolerance_override").is_null()) r.tolerance_override = j.at("tolerance_override").get<double>();
    for (const auto& k : j.at("checks")) {
      CheckRecord c;
      c.id = k.at("id").get<std::string>();
      c.module = k.at("module").get<std::string>();
      c.op = k.at("op").get<std::string>();
      c.status = parse_check_status(k.at("status").get<std::string>());
      if (k.contains("error")) {
        c.error_kind = k["error"].at("kind").get<std::string>();
        c.message = k["error"].at("message").get<std::string>();
      }
      if (!k.at("min_slack").is_null()) c.min_slack = k["min_slack"].get<double>();
      c.tolerance = read_number(k.at("tolerance"));
      if (!k.at("witness").is_null()) c.witness = sample_from(k["witness"]);
      c.values = k.at("values");
      c.notes = k.at("notes").get<std::vector<std::string>>();
      if (k.contains("elapsed_ms")) c.elapsed_ms = k["elapsed_ms"].get<double>();
      for (const auto& s : k.at("samples")) c.samples.push_back(sample_from(s));
      r.checks.push_back(std::move(c));
    }
    return r;
  } catch (const ordered_json::exception& e) {
    throw InvalidInput(std::string("malformed report: ") + e.what());
  }
}

std::string render_json(const ReportDocument& r) { return to_json(r).dump(2) + "\n"; }

std::string render_csv(const ReportDocument& r) {
  std::string out = "check_id,t,pair_id,tau,slack\n";
  for (const auto& c : r.checks)
    for (const auto& s : c.samples) {
      out += csv_field(c.id) + "," + format_double(s.t) + "," + std::to_string(s.pair_id) + ",";
      if (s.tau) out += format_double(*s.tau);
      out += "," + format_double(s.slack) + "\n";
    }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw InvalidInput("cannot write '" + path + "'");
}

}  // namespace srf

// Command-line front end: runs scenario checks and writes reports.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srf/report.hpp"
#include "srf/runner.hpp"
#include "srf/scenario.hpp"

namespace {

struct Flags {
  std::optional<double> tol;
  std::string format = "json";
  std::string out;
  std::size_t threads = 1;
  std::optional<unsigned long long> seed;
  bool timings = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tol", f.tol, "Tolerance used by every check")->check(CLI::NonNegativeNumber);
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", f.out, "Output file; '-' for stdout");
  cmd->add_option("--threads", f.threads, "Checks run in parallel")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Seed for generated test functions");
  cmd->add_flag("--timings", f.timings, "Record wall-clock time per check (breaks byte-identical output)");
}

srf::RunOptions run_options(const std::string& command, const Flags& f) {
  srf::RunOptions o;
  o.command = command;
  o.tol = f.tol;
  o.seed = f.seed;
  o.threads = f.threads;
  o.timings = f.timings;
  return o;
}

std::string render(const srf::ReportDocument& doc, const std::string& format) {
  return format == "csv" ? srf::render_csv(doc) : srf::render_json(doc);
}

// --out wins; otherwise the scenario's output paths; otherwise stdout.
void emit(const srf::ReportDocument& doc, const Flags& f, const srf::Scenario* sc) {
  if (!f.out.empty()) {
    srf::write_text(f.out, render(doc, f.format));
    return;
  }
  if (sc && sc->doc.contains("output")) {
    const auto& out = sc->doc["output"];
    auto resolve = [&](const std::string& p) { return p.empty() || p[0] == '/' ? p : sc->directory() + p; };
    if (out.contains("json")) srf::write_text(resolve(out["json"].get<std::string>()), srf::render_json(doc));
    if (out.contains("csv")) srf::write_text(resolve(out["csv"].get<std::string>()), srf::render_csv(doc));
    return;
  }
  srf::write_text("-", render(doc, f.format));
}

void summarize(const srf::ReportDocument& doc) {
  for (const auto& c : doc.checks) {
    if (c.status == srf::CheckStatus::Pass) continue;
    std::cerr << c.id << ": " << srf::to_string(c.status);
    if (!c.message.empty()) std::cerr << " (" << c.message << ")";
    if (c.witness) std::cerr << " witness t=" << c.witness->t << " pair=" << c.witness->pair_id << " slack=" << c.witness->slack;
    std::cerr << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks for time-dependent metric measure spaces and super-Ricci flows"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(srf::kToolName) + " " + srf::kToolVersion);

  Flags flags;
  std::string scenario_path;
  std::vector<CLI::App*> single;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"verify", "Run every check of a scenario"},
           {"ot", "Run the transport, entropy-convexity and flow checks of a scenario"},
           {"gamma", "Run the generator (Gamma-calculus) checks of a scenario"},
           {"riemann", "Run the smooth-family checks of a scenario"}}) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    add_flags(cmd, flags);
    single.push_back(cmd);
  }
  std::string first, second;
  auto* ddi = app.add_subcommand("ddi", "Distance between the instances of two scenarios, with slice bounds");
  ddi->add_option("a", first, "First scenario")->required();
  ddi->add_option("b", second, "Second scenario")->required();
  add_flags(ddi, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ddi->parsed()) {
      const auto a = srf::load_scenario(first);
      const auto b = srf::load_scenario(second);
      const auto doc = srf::run_ddi_pair(a, b, run_options("ddi", flags));
      emit(doc, flags, nullptr);
      summarize(doc);
      return doc.exit_code();
    }
    for (auto* cmd : single) {
      if (!cmd->parsed()) continue;
      const auto sc = srf::load_scenario(scenario_path);
      const auto doc = srf::run_scenario(sc, run_options(cmd->get_name(), flags));
      emit(doc, flags, &sc);
      summarize(doc);
      return doc.exit_code();
    }
  } catch (const srf::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

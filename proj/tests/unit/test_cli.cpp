#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "srf/report.hpp"
#include "srf/runner.hpp"
#include "srf/scenario.hpp"

using namespace srf;

namespace {

const std::string kScenarios = std::string(SRF_SOURCE_DIR) + "/scenarios/";

std::string circle(const std::string& checks) {
  return R"({
  "time_grid": {"first": 0, "last": 0.25, "intervals": 2},
  "space": {"kind": "cycle", "vertices": 8, "circumference": 1},
  "checks": [)" + checks + "]\n}\n";
}

ConfigError config_error(const std::string& text) {
  try {
    parse_scenario(text, "s.json");
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("no configuration error raised");
  return ConfigError("");
}

std::size_t total_samples(const ReportDocument& r) {
  std::size_t n = 0;
  for (const auto& c : r.checks) n += c.samples.size();
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("empty check list gives an empty report and exit 0") {
    auto sc = parse_scenario(R"({"checks": []})");
    auto r = run_scenario(sc);
    CHECK(r.checks.empty());
    CHECK(r.exit_code() == 0);
    CHECK(r.schema_version == 1);
  }

  TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64("") == "fnv1a64:cbf29ce484222325");
    CHECK(fnv1a64("a") == "fnv1a64:af63dc4c8601ec8c");
    CHECK(fnv1a64("foobar") == "fnv1a64:85944171f73967e8");
  }

  TEST_CASE("malformed JSON reports line and column") {
    auto e = config_error("{\n  \"name\": \"x\",\n  \"checks\": [1 2]\n}\n");
    CHECK(e.line() == 3);
    CHECK(e.column() == 16);
    CHECK(std::string(e.what()).find("s.json:3:16") == 0);
  }

  TEST_CASE("unknown keys are rejected at their position") {
    auto top = config_error("{\n  \"checks\": [],\n  \"tolerence\": 1e-6\n}");
    CHECK(top.line() == 3);
    CHECK(top.column() == 3);
    CHECK(top.detail().find("unknown key 'tolerence'") != std::string::npos);

    auto nested = config_error(circle(R"(
    {"module": "transport", "op": "wasserstein",
     "params": {"t": 0, "mu0": 0, "mu1": 4, "mu2": 1}})"));
    CHECK(nested.line() == 6);
    CHECK(nested.column() == 45);
    CHECK(nested.detail().find("unknown parameter 'mu2'") != std::string::npos);

    auto section = config_error("{\n  \"space\": {\"kind\": \"cycle\", \"vertex\": 3}\n}");
    CHECK(section.line() == 2);
    CHECK(section.column() == 30);
  }

  TEST_CASE("ops and params are validated before anything runs") {
    CHECK(config_error(circle(R"({"module": "nope", "op": "x"})")).detail().find("unknown module") != std::string::npos);
    CHECK(config_error(circle(R"({"module": "srfcheck", "op": "super_ricci_weak"})")).detail().find("unknown op") !=
          std::string::npos);
    CHECK(config_error(circle(R"({"module": "transport", "op": "wasserstein", "params": {"t": 0, "mu0": 1}})"))
              .detail()
              .find("needs parameter 'mu1'") != std::string::npos);
    CHECK(config_error(circle(R"({"module": "transport", "op": "wasserstein", "params": {"t": -1, "mu0": 1, "mu1": 2}})"))
              .detail()
              .find("must be a non-negative integer") != std::string::npos);
    CHECK(config_error(circle(R"({"module": "gammacalc", "op": "srf_gamma"})")).detail().find("'generator' section") !=
          std::string::npos);
    CHECK(config_error(circle(R"({"id": "a", "module": "tgs", "op": "controls"}, {"id": "a", "module": "tgs", "op": "controls"})"))
              .detail()
              .find("duplicate check id") != std::string::npos);
  }

  TEST_CASE("bad section contents point into the section") {
    auto sc = parse_scenario("{\n  \"time_grid\": {\"times\": [0, 0]},\n  \"checks\": []\n}", "g.json");
    try {
      run_scenario(sc);
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("strictly increasing") != std::string::npos);
    }
  }

  TEST_CASE("a failing check does not stop later checks") {
    auto sc = parse_scenario(circle(R"(
      {"id": "bad-time", "module": "dynconv", "op": "dynamic_convexity", "params": {"t": 0, "form": "slope"}},
      {"id": "bad-vertex", "module": "transport", "op": "wasserstein", "params": {"t": 0, "mu0": 0, "mu1": 99}},
      {"id": "w2", "module": "transport", "op": "wasserstein", "params": {"t": 0, "mu0": 0, "mu1": 4}})"));
    auto r = run_scenario(sc);
    REQUIRE(r.checks.size() == 3);
    CHECK(r.checks[0].status == CheckStatus::Error);
    CHECK(r.checks[0].error_kind == "config");
    CHECK(r.checks[1].status == CheckStatus::Error);
    CHECK(r.checks[1].message.find("vertex out of range") != std::string::npos);
    CHECK(r.checks[2].status == CheckStatus::Pass);
    // Antipodal points of a unit circle with 8 vertices: W^2 = 1/4.
    CHECK(r.checks[2].values["cost"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.exit_code() == 2);
  }

  TEST_CASE("numerical failures map to exit 3") {
    auto sc = parse_scenario(R"({
      "time_grid": {"first": 0, "last": 1, "intervals": 1},
      "generator": {"kind": "circle", "states": 6, "circumference": 1},
      "checks": [{"module": "gammacalc", "op": "propagator", "params": {"s": 0, "t": 1, "substeps": 1}}]})");
    auto r = run_scenario(sc);
    REQUIRE(r.checks.size() == 1);
    CHECK(r.checks[0].status == CheckStatus::Error);
    CHECK(r.checks[0].error_kind == "numerical");
    CHECK(r.exit_code() == 3);
  }

  TEST_CASE("exit code precedence: config over numerical over violation") {
    ReportDocument r;
    r.checks.resize(3);
    CHECK(r.exit_code() == 0);
    r.checks[0].status = CheckStatus::Fail;
    CHECK(r.exit_code() == 1);
    r.checks[1].status = CheckStatus::Undetermined;
    CHECK(r.exit_code() == 3);
    r.checks[2].status = CheckStatus::Error;
    r.checks[2].error_kind = "numerical";
    CHECK(r.exit_code() == 3);
    r.checks[2].error_kind = "config";
    CHECK(r.exit_code() == 2);
  }

  TEST_CASE("bundled flat circle passes and the wrong-sign circle fails with witnesses") {
    auto flat = run_scenario(load_scenario(kScenarios + "flat-circle-static.json"));
    CHECK(flat.exit_code() == 0);
    for (const auto& c : flat.checks) CHECK(c.status == CheckStatus::Pass);

    auto wrong = run_scenario(load_scenario(kScenarios + "shrinking-circle-wrong-sign.json"));
    CHECK(wrong.exit_code() == 1);
    REQUIRE(wrong.checks[0].witness);
    // Antipodal diracs: W_0^2 = pi^2 and the slack is -K W_0^2 with K = 1.
    CHECK(wrong.checks[0].witness->slack == doctest::Approx(-M_PI * M_PI).epsilon(1e-9));
  }

  TEST_CASE("report round trip and CSV row count") {
    RunOptions opt;
    opt.timings = true;
    auto r = run_scenario(load_scenario(kScenarios + "shrinking-circle-wrong-sign.json"), opt);
    const std::string text = render_json(r);
    const auto back = parse_report(text);
    CHECK(back == r);
    CHECK(render_json(back) == text);

    const std::string csv = render_csv(r);
    const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(rows == total_samples(r) + 1);
    CHECK(csv.rfind("check_id,t,pair_id,tau,slack\n", 0) == 0);
    CHECK_THROWS_AS(write_text("/nonexistent-dir/x.json", text), InvalidInput);
  }

  TEST_CASE("determinism across runs and thread counts") {
    auto sc = load_scenario(kScenarios + "gamma-accelerating-heat.json");
    RunOptions one, four;
    four.threads = 4;
    const auto a = render_json(run_scenario(sc, one));
    CHECK(render_json(run_scenario(sc, one)) == a);
    CHECK(render_json(run_scenario(sc, four)) == a);
  }

  TEST_CASE("command filters and overrides") {
    auto sc = load_scenario(kScenarios + "flat-circle-static.json");
    RunOptions ot;
    ot.command = "gamma";
    CHECK(run_scenario(sc, ot).checks.empty());
    RunOptions tight;
    tight.tol = 0.0;
    tight.seed = 42;
    auto r = run_scenario(sc, tight);
    CHECK(r.seed == 42);
    REQUIRE(r.tolerance_override);
    for (const auto& c : r.checks)
      if (c.op == "super_ricci_strong") CHECK(c.tolerance == 0.0);
    CHECK_THROWS_AS(command_modules("plot"), InvalidInput);
  }

  TEST_CASE("ddi pair command") {
    auto a = load_scenario(kScenarios + "ddi-two-point-a.json");
    auto b = load_scenario(kScenarios + "ddi-two-point-b.json");
    auto r = run_ddi_pair(a, b);
    REQUIRE(r.checks.size() == 2);
    CHECK(r.inputs.size() == 2);
    CHECK(r.checks[0].values["value"].get<double>() > 0);
    CHECK(r.checks[1].samples.size() == 3);
    CHECK(r.exit_code() == 0);
    auto self = run_ddi_pair(a, a);
    CHECK(self.checks[0].values["value"].get<double>() <= 1e-6);
  }

  TEST_CASE("every bundled scenario parses") {
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_scenario(entry.path().string()));
      ++count;
    }
    CHECK(count >= 8);
  }
}

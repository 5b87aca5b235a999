#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "srf/ddi.hpp"
#include "srf/report.hpp"
#include "srf/scenario.hpp"

namespace srf {

struct RunOptions {
  // verify runs every check; ot, gamma and riemann keep the checks of their modules.
  std::string command = "verify";
  std::optional<double> tol;                 // replaces every check tolerance
  std::optional<unsigned long long> seed;    // replaces the scenario seed
  std::size_t threads = 1;
  bool timings = false;
};

// Modules selected by a command; empty means all.
std::vector<std::string> command_modules(const std::string& command);

// Builds the scenario's instances (throws ConfigError on bad sections) and runs the
// selected checks in declared order. A check that throws is recorded as an error and
// the remaining checks still run.
ReportDocument run_scenario(const Scenario& scenario, const RunOptions& opt = {});

// Timed mm-instance of a scenario: the "instance" section, or the space distances with
// the measure section's reference and weights.
TimedMmInstance build_timed_instance(const Scenario& scenario);

// Distance between the instances of two scenarios and the slice bound at every grid time.
ReportDocument run_ddi_pair(const Scenario& a, const Scenario& b, const RunOptions& opt = {});

}  // namespace srf

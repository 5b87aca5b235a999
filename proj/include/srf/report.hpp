#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace srf {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolName = "srfkit";
inline constexpr const char* kToolVersion = "0.1.0";

/// One point of a slack series. Non-finite slacks are written as null and read back as +inf.
struct SlackSample {
  double t = 0.0;
  std::size_t pair_id = 0;
  std::optional<double> tau;
  double slack = 0.0;

  bool operator==(const SlackSample&) const = default;
};

enum class CheckStatus { Pass, Fail, Undetermined, Error };
std::string to_string(CheckStatus s);
CheckStatus parse_check_status(const std::string& s);

struct CheckRecord {
  std::string id;
  std::string module;
  std::string op;
  CheckStatus status = CheckStatus::Pass;
  std::string error_kind;  // "config" or "numerical" when status is Error
  std::string message;
  std::optional<double> min_slack;
  double tolerance = 0.0;
  std::optional<SlackSample> witness;
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  std::vector<std::string> notes;
  std::vector<SlackSample> samples;
  std::optional<double> elapsed_ms;

  bool operator==(const CheckRecord&) const = default;
};

struct ReportDocument {
  int schema_version = kReportSchemaVersion;
  std::string tool = kToolName;
  std::string version = kToolVersion;
  std::string command;
  std::vector<std::string> inputs;  // scenario paths as given
  std::string scenario_hash;
  unsigned long long seed = 0;
  std::optional<double> tolerance_override;
  std::vector<CheckRecord> checks;

  bool operator==(const ReportDocument&) const = default;

  // 2 on configuration errors, else 3 on numerical failures or undetermined verdicts,
  // else 1 on violations, else 0.
  int exit_code() const;
};

nlohmann::ordered_json to_json(const ReportDocument& r);
// Inverse of render_json.
ReportDocument parse_report(const std::string& text);

// Two-space indented JSON with a trailing newline.
std::string render_json(const ReportDocument& r);
// Columns check_id,t,pair_id,tau,slack; one row per sample.
std::string render_csv(const ReportDocument& r);

// Writes to path, or to stdout for "-"; throws InvalidInput when the path is unwritable.
void write_text(const std::string& path, const std::string& text);

}  // namespace srf

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "geomcmp/errors.hpp"
#include "geomcmp/report.hpp"

namespace geomcmp::scenario {

/// One batch work item. Numeric parameters live in `params`; rigidity
/// scenarios may name a CSV profile instead of generating one. `expect` is
/// "pass" or "expect-hypothesis-violation" (negative controls: the run is
/// considered successful when the hypothesis flag fires).
struct Scenario {
  std::string id;
  std::string kind;  // bound | riccati-real | riccati-kahler | rigidity |
                     // eigen | cusp | index-form
  std::map<std::string, double> params;
  std::string expect = "pass";
  std::string profile;  // resolved path of an optional radial profile CSV
};

struct ScenarioConfig {
  std::vector<Scenario> scenarios;
};

/// Parses and validates the JSON config text. Relative profile paths are
/// resolved against base_dir. Throws ConfigError on any schema violation:
/// unknown kinds, unknown keys, duplicate ids, non-numeric parameters.
ScenarioConfig parse_config(const std::string& text,
                            const std::filesystem::path& base_dir);

ScenarioConfig load_config(const std::filesystem::path& path);

/// Comparison tolerance: the GEOMCMP_TOL environment variable when set
/// (must parse as a positive double), otherwise 1e-8. A scenario's "tol"
/// parameter overrides both.
double default_tolerance();

struct ScenarioOutcome {
  Scenario scenario;
  report::VerificationReport rep;
  bool expectation_met = false;
  double runtime_ms = 0.0;
};

/// Dispatches one scenario to the owning module. Precondition violations
/// surface as ConfigError (the config invariants promise they cannot
/// happen); a HypothesisViolated signal is recorded in the report instead
/// of escaping, so negative controls can expect it.
ScenarioOutcome run_scenario(const Scenario& sc);

/// Serializations. The JSON and CSV bytes depend only on the scenario,
/// seed, and tool version; the meta sidecar carries the wall-clock runtime
/// and is excluded from determinism guarantees.
std::string report_json(const ScenarioOutcome& out);
std::string report_csv(const report::VerificationReport& rep);
std::string meta_json(const ScenarioOutcome& out);

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Writes <id>.json, <id>.csv and <id>.meta.json into out_dir.
void write_outputs(const ScenarioOutcome& out,
                   const std::filesystem::path& out_dir);

/// Runs every scenario on up to `jobs` worker threads, writing outputs as
/// they complete. Results come back in config order regardless of the
/// thread schedule.
std::vector<ScenarioOutcome> run_all(const ScenarioConfig& config,
                                     const std::filesystem::path& out_dir,
                                     int jobs);

/// Aggregates a directory of scenario reports into a summary CSV with
/// columns scenario_id,kind,n,k,h,pass,max_margin,runtime_ms, ordered by
/// id. Throws ConfigError on duplicate ids or unreadable files; an empty
/// directory yields just the header.
std::string aggregate_reports(const std::filesystem::path& dir);

}  // namespace geomcmp::scenario

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Structured results of a verification run. One report per scenario; rows are
// individual checks, trials group rows. Margin convention: every row is
// normalized so that the check passes iff margin <= its tolerance (upper
// bounds store value - bound, lower bounds store bound - value, equalities
// store |value - bound|). Rows with check == "hypothesis" record
// admissibility of the sampled data and do not count as comparison failures.

namespace geomcmp::report {

struct CheckRow {
  int trial = 0;
  std::string check;
  double x = 0.0;  // abscissa: arclength s, radius r, or domain radius R
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool pass = true;
};

struct TrialSummary {
  int trial = 0;
  bool model = false;          // zero-perturbation reference trial
  bool hypothesis_ok = true;
  std::optional<double> focal_s;
  double max_margin = -std::numeric_limits<double>::infinity();
  bool pass = true;
};

struct VerificationReport {
  std::string kind;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  std::string note;  // records e.g. the hypothesis sub-family actually drawn
  std::map<std::string, double> params;

  std::vector<CheckRow> rows;
  std::vector<TrialSummary> trials;

  // Summary, derived by finalize().
  bool pass = true;
  double max_margin = -std::numeric_limits<double>::infinity();
  int failed_checks = 0;
  bool hypothesis_violated = false;

  /// Recomputes the summary block from rows and trials. max_margin and
  /// failed_checks run over conclusion rows only; hypothesis rows set
  /// hypothesis_violated via their trials instead.
  void finalize();
};

}  // namespace geomcmp::report

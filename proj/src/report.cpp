#include "geomcmp/report.hpp"

#include <cmath>

namespace geomcmp::report {

void VerificationReport::finalize() {
  pass = true;
  max_margin = -std::numeric_limits<double>::infinity();
  failed_checks = 0;
  hypothesis_violated = false;
  for (const CheckRow& row : rows) {
    if (row.check == "hypothesis") continue;
    if (row.margin > max_margin) max_margin = row.margin;
    if (!row.pass) {
      pass = false;
      ++failed_checks;
    }
  }
  // Reports whose trials were all flagged carry no conclusion rows; a zero
  // maximum keeps the summary (and its serializations) finite. The second
  // clamp drops the sign of a negative zero.
  if (!std::isfinite(max_margin)) max_margin = 0.0;
  if (max_margin == 0.0) max_margin = 0.0;
  for (TrialSummary& t : trials) {
    if (!t.hypothesis_ok) hypothesis_violated = true;
    if (!std::isfinite(t.max_margin)) t.max_margin = 0.0;
    if (t.max_margin == 0.0) t.max_margin = 0.0;
  }
}

}  // namespace geomcmp::report

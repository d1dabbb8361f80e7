#pragma once

#include <vector>

namespace rimlab {

// Least-squares fit of log |series[n]| against log n over n in [n_lo, n_hi].
struct PowerLawFit {
  double exponent;
  double std_err;   // standard error of the exponent from the residuals
  double r2;
  int n_lo;
  int n_hi;
  int points;       // points actually used after trimming
};

// `series` is indexed by n directly (entries below n_lo are ignored, so a
// 1-indexed table with padding at 0 works as is).  Entries that are zero or
// not finite are skipped; when a standard-error series is supplied, entries
// below 3 x se are treated as noise floor and skipped as well.  Fewer than 8
// usable points is an error.  Asymptotic windows should not start below
// n = 50; that is the callers' default, not enforced here.
PowerLawFit fit_power_law(const std::vector<double>& series, int n_lo, int n_hi);
PowerLawFit fit_power_law(const std::vector<double>& series,
                          const std::vector<double>& se, int n_lo, int n_hi);

}  // namespace rimlab

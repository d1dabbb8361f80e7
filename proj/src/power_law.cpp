#include "rimlab/power_law.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rimlab {

namespace {

PowerLawFit fit_impl(const std::vector<double>& series, const std::vector<double>* se,
                     int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi < n_lo)
    throw std::domain_error("fit_power_law: need 1 <= n_lo <= n_hi");
  const int top = std::min<int>(n_hi, static_cast<int>(series.size()) - 1);

  std::vector<double> xs, ys;
  for (int n = n_lo; n <= top; ++n) {
    const double v = std::abs(series[static_cast<std::size_t>(n)]);
    if (!std::isfinite(v) || v == 0.0) continue;
    if (se && v < 3.0 * (*se)[static_cast<std::size_t>(n)]) continue;  // noise floor
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(v));
  }
  const int m = static_cast<int>(xs.size());
  if (m < 8)
    throw std::invalid_argument("fit_power_law: only " + std::to_string(m) +
                                " usable points in [" + std::to_string(n_lo) + ", " +
                                std::to_string(n_hi) + "], need at least 8");

  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < m; ++i) {
    sx += xs[static_cast<std::size_t>(i)];
    sy += ys[static_cast<std::size_t>(i)];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < m; ++i) {
    const double dx = xs[static_cast<std::size_t>(i)] - mx;
    const double dy = ys[static_cast<std::size_t>(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_power_law: degenerate abscissa");

  const double slope = sxy / sxx;
  double ss_res = syy - slope * sxy;
  if (ss_res < 0.0) ss_res = 0.0;
  const double std_err = m > 2 ? std::sqrt(ss_res / (m - 2) / sxx) : 0.0;
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return PowerLawFit{slope, std_err, r2, n_lo, n_hi, m};
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& series, int n_lo, int n_hi) {
  return fit_impl(series, nullptr, n_lo, n_hi);
}

PowerLawFit fit_power_law(const std::vector<double>& series, const std::vector<double>& se,
                          int n_lo, int n_hi) {
  if (se.size() < series.size())
    throw std::domain_error("fit_power_law: se series shorter than the value series");
  return fit_impl(series, &se, n_lo, n_hi);
}

}  // namespace rimlab

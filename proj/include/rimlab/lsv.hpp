#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rimlab {

// One member of the interval map family on [0,1]:
//
//   T(x) = x (1 + 2^g x^g)   for x in [0, 1/2],
//   T(x) = 2x - 1            for x in (1/2, 1],
//
// with parameter g > 0.  The left branch fixes 0 with derivative exactly 1
// (the neutral fixed point) and maps 1/2 to 1; the right branch is affine
// with slope 2 for every g.  2^g is cached because map evaluations and
// inversions sit in every inner loop of the package.
struct MapParameter {
  double gamma;
  double pow2g;

  explicit MapParameter(double g) : gamma(g), pow2g(std::pow(2.0, g)) {
    if (!(g > 0.0) || !std::isfinite(g))
      throw std::domain_error("map parameter must be a finite positive real, got " +
                              std::to_string(g));
  }
};

enum class BranchId { left, right };

namespace detail {

inline void require_unit_interval(double x, const char* who) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error(std::string(who) + ": x must lie in [0,1], got " +
                            std::to_string(x));
}

}  // namespace detail

// Map evaluation.  x = 1/2 belongs to the left branch, and the identity
// T(1/2) = 1 is made exact rather than left to the rounding of
// 2^g * (1/2)^g.
inline double lsv_eval(const MapParameter& m, double x) {
  detail::require_unit_interval(x, "lsv_eval");
  if (x == 0.5) return 1.0;
  if (x < 0.5) return x * (1.0 + m.pow2g * std::pow(x, m.gamma));
  return 2.0 * x - 1.0;
}

// Derivative of the stated branch, orders 1..3.  The left-branch formulas
//
//   T'   = 1 + 2^g (1+g) x^g
//   T''  = 2^g g (1+g) x^(g-1)
//   T''' = 2^g g (g-1) (1+g) x^(g-2)
//
// are evaluated directly; at x = 0 the IEEE conventions pow(0,p) = +inf for
// p < 0 and pow(0,0) = 1 produce exactly the one-sided limits, which are
// signed infinities in the blow-up cases (g < 1 at order 2; g != 1, g < 2 at
// order 3).  The single indeterminate combination, order 3 at g = 1, is an
// identically zero derivative and is returned as such.
inline double lsv_deriv(const MapParameter& m, double x, int order, BranchId branch) {
  detail::require_unit_interval(x, "lsv_deriv");
  if (order < 1 || order > 3)
    throw std::domain_error("lsv_deriv: order must be 1, 2 or 3, got " +
                            std::to_string(order));
  if (branch == BranchId::right) {
    if (x < 0.5)
      throw std::domain_error("lsv_deriv: right branch lives on [1/2,1], got x = " +
                              std::to_string(x));
    return order == 1 ? 2.0 : 0.0;
  }
  if (x > 0.5)
    throw std::domain_error("lsv_deriv: left branch lives on [0,1/2], got x = " +
                            std::to_string(x));
  const double g = m.gamma, c = m.pow2g;
  switch (order) {
    case 1:
      return 1.0 + c * (1.0 + g) * std::pow(x, g);
    case 2:
      return c * g * (1.0 + g) * std::pow(x, g - 1.0);
    default:
      if (g == 1.0) return 0.0;
      return c * g * (g - 1.0) * (1.0 + g) * std::pow(x, g - 2.0);
  }
}

// Two-argument form: the branch is implied by the side of 1/2.  At exactly
// 1/2 both branches are defined and disagree from order 1 on, so the caller
// must disambiguate with the explicit-branch overload.
inline double lsv_deriv(const MapParameter& m, double x, int order) {
  detail::require_unit_interval(x, "lsv_deriv");
  if (x == 0.5)
    throw std::invalid_argument(
        "lsv_deriv: x = 1/2 is the branch point; pass a BranchId to choose a side");
  return lsv_deriv(m, x, order, x < 0.5 ? BranchId::left : BranchId::right);
}

namespace detail {

// Newton iteration for the left-branch preimage, i.e. the root of
// f(x) = x (1 + c x^g) - y on [0, 1/2].  f is increasing and convex with
// f(0) = -y < 0, so starting at or above the root the iteration descends
// monotonically onto it; a bisection bracket catches the rare step that
// rounding pushes outside [lo, hi].  Absolute tolerance 1e-14 on the step,
// at most 200 iterations.  The g = 1/2 instantiation turns the inner power
// into a sqrt, which matters in the long sampling chains.
template <bool UseSqrt>
inline double newton_left(double c, double g, double y) {
  double lo = 0.0;
  double hi = std::min(y, 0.5);
  double x = hi;
  for (int it = 0; it < 200; ++it) {
    const double xg = UseSqrt ? std::sqrt(x) : std::pow(x, g);
    const double f = x * (1.0 + c * xg) - y;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double fp = 1.0 + c * (1.0 + g) * xg;
    double step = f / fp;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-14) return xn;
    x = xn;
  }
  throw std::runtime_error("invert_left: no convergence after 200 iterations");
}

}  // namespace detail

// Preimage under the left branch: the unique x in [0, 1/2] with T(x) = y.
// The endpoint images are returned exactly: y = 0 -> 0, y = 1 -> 1/2.
inline double invert_left(const MapParameter& m, double y) {
  if (!(y >= 0.0 && y <= 1.0))
    throw std::domain_error("invert_left: y must lie in [0,1], got " + std::to_string(y));
  if (y == 0.0) return 0.0;
  if (y == 1.0) return 0.5;
  if (m.gamma == 0.5) return detail::newton_left<true>(m.pow2g, m.gamma, y);
  return detail::newton_left<false>(m.pow2g, m.gamma, y);
}

// Preimage under the right branch: the unique x in (1/2, 1] with 2x - 1 = y.
inline double invert_right(double y) {
  if (!(y > 0.0 && y <= 1.0))
    throw std::domain_error("invert_right: y must lie in (0,1], got " + std::to_string(y));
  return (y + 1.0) / 2.0;
}

// Schwarzian derivative T'''/T' - (3/2)(T''/T')^2 of the left branch on the
// open interval (0, 1/2).  The expression is singular at 0 (and the right
// branch is affine, so its Schwarzian is identically zero and not exposed
// here); both endpoints are rejected.
inline double schwarzian(const MapParameter& m, double x) {
  if (!(x > 0.0 && x < 0.5))
    throw std::domain_error(
        "schwarzian: defined on the open interval (0, 1/2), singular at 0; got " +
        std::to_string(x));
  const double d1 = lsv_deriv(m, x, 1, BranchId::left);
  const double d2 = lsv_deriv(m, x, 2, BranchId::left);
  const double d3 = lsv_deriv(m, x, 3, BranchId::left);
  const double r = d2 / d1;
  return d3 / d1 - 1.5 * r * r;
}

// For g > 1 the Schwarzian of the left branch changes sign once on (0, 1/2):
// clearing denominators gives S * (T')^2 * x^(2-g) / (2^g g (1+g)) =
// (g-1) - 2^g (1+g)(1+g/2) x^g, so S is positive below
//
//   x* = (1/2) ((g-1) / ((1+g)(1+g/2)))^(1/g)
//
// and negative above.  For g <= 1 the factor is negative on all of (0, 1/2)
// and no threshold exists.
inline double schwarzian_positive_threshold(double gamma) {
  if (!(gamma > 1.0))
    throw std::domain_error(
        "schwarzian_positive_threshold: the sign change exists only for gamma > 1, got " +
        std::to_string(gamma));
  return 0.5 * std::pow((gamma - 1.0) / ((1.0 + gamma) * (1.0 + gamma / 2.0)),
                        1.0 / gamma);
}

}  // namespace rimlab

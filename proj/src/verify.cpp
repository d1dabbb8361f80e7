#include "rimlab/verify.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "rimlab/rng.hpp"

namespace rimlab {

namespace {

constexpr double kCheckTol = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string pair_params(const MapParameter& lo, const MapParameter& hi, int grid) {
  return "lo=" + g12(lo.gamma) + " hi=" + g12(hi.gamma) + " grid=" + std::to_string(grid);
}

std::string sys_params(const SystemParams& p) {
  return "alpha=" + g12(p.alpha.gamma) + " beta=" + g12(p.beta.gamma) +
         " p1=" + g12(p.p1);
}

void record_case(CheckResult& r, double margin, const std::string& desc, double tol) {
  ++r.n_cases;
  if (r.n_cases == 1 || margin < r.worst_margin) r.worst_margin = margin;
  if (margin < -tol && r.counterexamples.size() < 5) r.counterexamples.push_back(desc);
}

void finalize(CheckResult& r, double tol = kCheckTol) {
  r.pass = r.n_cases > 0 && r.worst_margin >= -tol;
}

}  // namespace

CheckResult check_domination(const MapParameter& lo, const MapParameter& hi,
                             int grid_points) {
  CheckResult r;
  r.check = "domination";
  r.params = pair_params(lo, hi, grid_points);
  for (int k = 1; k <= grid_points; ++k) {
    const double x = 0.5 * k / (grid_points + 1);
    const double margin = lsv_eval(lo, x) - lsv_eval(hi, x);
    record_case(r, margin, "x=" + g12(x) + " Tlo=" + g12(lsv_eval(lo, x)) +
                               " Thi=" + g12(lsv_eval(hi, x)),
                kCheckTol);
  }
  // The branches agree exactly at both ends.
  for (double x : {0.0, 0.5}) {
    const double margin = 1e-15 - std::abs(lsv_eval(lo, x) - lsv_eval(hi, x));
    record_case(r, margin, "endpoint x=" + g12(x), kCheckTol);
  }
  finalize(r);
  return r;
}

CheckResult check_monotone_pair(const MapParameter& lo, const MapParameter& hi,
                                int grid_points) {
  CheckResult r;
  r.check = "monotone_pair";
  r.params = pair_params(lo, hi, grid_points);
  for (int i = 0; i <= grid_points; ++i) {
    const double x = 0.5 * i / grid_points;
    const double thx = lsv_eval(hi, x);
    for (int j = i; j <= grid_points; ++j) {
      const double y = 0.5 * j / grid_points;
      const double margin = lsv_eval(lo, y) - thx;
      if (margin < r.worst_margin || r.n_cases == 0 || margin < -kCheckTol)
        record_case(r, margin, "x=" + g12(x) + " y=" + g12(y), kCheckTol);
      else
        ++r.n_cases;
    }
  }
  finalize(r);
  return r;
}

namespace {

void ladder_guard(const std::vector<double>& ladder, int depth, const char* who) {
  if (static_cast<int>(ladder.size()) < depth + 1)
    throw std::domain_error(std::string(who) + ": ladder shorter than the check depth");
}

}  // namespace

CheckResult check_rough_bounds_against(const SystemParams& p, int depth,
                                       const std::vector<double>& lower_ladder,
                                       const std::vector<double>& upper_ladder) {
  if (depth < 1 || depth > 20)
    throw std::domain_error("check_rough_bounds: depth must lie in [1,20]");
  ladder_guard(lower_ladder, depth, "check_rough_bounds");
  ladder_guard(upper_ladder, depth, "check_rough_bounds");
  CheckResult r;
  r.check = "rough_bounds";
  r.params = sys_params(p) + " depth=" + std::to_string(depth);
  for (int n = 1; n <= depth; ++n) {
    const int L = n - 1;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << L); ++bits) {
      const SymbolString w = word_from_bits(bits, L, p);
      const double x = backward_level(w, p);
      const double lo = lower_ladder[static_cast<std::size_t>(n)];
      const double hi = upper_ladder[static_cast<std::size_t>(n)];
      const double margin = std::min(x - lo, hi - x);
      record_case(r, margin,
                  "n=" + std::to_string(n) + " word=" + word_to_string(w) + " x=" +
                      g12(x) + " bounds=[" + g12(lo) + "," + g12(hi) + "]",
                  kCheckTol);
    }
  }
  finalize(r);
  return r;
}

CheckResult check_rough_bounds(const SystemParams& p, int depth) {
  return check_rough_bounds_against(p, depth, pure_backward(p.alpha, depth),
                                    pure_backward(p.beta, depth));
}

CheckResult check_rough_bounds_sampled(const SystemParams& p,
                                       const std::vector<int>& depths, long words,
                                       std::uint64_t seed) {
  CheckResult r;
  r.check = "rough_bounds_sampled";
  int max_depth = 1;
  for (int n : depths) {
    if (n < 1) throw std::domain_error("check_rough_bounds_sampled: depths must be >= 1");
    max_depth = std::max(max_depth, n);
  }
  r.params = sys_params(p) + " words=" + std::to_string(words) +
             " max_depth=" + std::to_string(max_depth);
  const std::vector<double> lower = pure_backward(p.alpha, max_depth);
  const std::vector<double> upper = pure_backward(p.beta, max_depth);
  SplitMix64 rng(seed);
  for (int n : depths) {
    const double lo = lower[static_cast<std::size_t>(n)];
    const double hi = upper[static_cast<std::size_t>(n)];
    for (long s = 0; s < words; ++s) {
      double t = 0.5;
      int n_a = 0;
      for (int j = 0; j < n - 1; ++j) {
        const bool pick_a = rng.next_double() < p.p1;
        n_a += pick_a ? 1 : 0;
        t = invert_left(pick_a ? p.alpha : p.beta, t);
      }
      const double margin = std::min(t - lo, hi - t);
      if (margin < r.worst_margin || r.n_cases == 0 || margin < -kCheckTol)
        record_case(r, margin,
                    "n=" + std::to_string(n) + " sample=" + std::to_string(s) + " x=" +
                        g12(t),
                    kCheckTol);
      else
        ++r.n_cases;
    }
  }
  finalize(r);
  return r;
}

CheckResult check_k0_against(const SystemParams& p, int depth,
                             const std::vector<double>& alpha_ladder) {
  if (depth < 1 || depth > 20)
    throw std::domain_error("check_k0: depth must lie in [1,20]");
  ladder_guard(alpha_ladder, depth, "check_k0");
  CheckResult r;
  r.check = "k0_refinement";
  r.params = sys_params(p) + " depth=" + std::to_string(depth);
  for (int n = 2; n <= depth; ++n) {
    const int L = n - 1;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << L); ++bits) {
      const SymbolString w = word_from_bits(bits, L, p);
      int n_a = 0;
      for (Symbol s : w.s) n_a += s == Symbol::A ? 1 : 0;
      if (n_a < 1) continue;
      const int k0 = n_a - 1;  // binding instance of #A > K0
      const double bound = k0 >= 1 ? alpha_ladder[static_cast<std::size_t>(k0)] : 1.0;
      const double x = backward_level(w, p);
      record_case(r, bound - x,
                  "n=" + std::to_string(n) + " word=" + word_to_string(w) + " x=" +
                      g12(x) + " bound=" + g12(bound) + " K0=" + std::to_string(k0),
                  kCheckTol);
    }
  }
  finalize(r);
  return r;
}

CheckResult check_k0(const SystemParams& p, int depth) {
  return check_k0_against(p, depth, pure_backward(p.alpha, depth));
}

CheckResult check_contraction(const SystemParams& p, int i_max, int pairs_per_cell,
                              std::uint64_t seed) {
  CheckResult r;
  r.check = "separation_contraction";
  r.params = sys_params(p) + " i_max=" + std::to_string(i_max) +
             " pairs=" + std::to_string(pairs_per_cell);
  SplitMix64 rng(seed);
  for (int i = 1; i <= i_max; ++i) {
    for (const TowerCell& cell : base_partition(i, p)) {
      const double om = 0.5 * (cell.omega.lo + cell.omega.hi);
      const double lo = cell.xband.lo, hi = cell.xband.hi;
      for (int q = 0; q < pairs_per_cell; ++q) {
        const double x1 = lo + (hi - lo) * (0.02 + 0.96 * rng.next_double());
        const double x2 = lo + (hi - lo) * (0.02 + 0.96 * rng.next_double());
        const int s = separation_time(SkewPoint{x1, om}, SkewPoint{x2, om}, p);
        if (s < 0) continue;  // identical draws never separate
        const double margin = std::pow(kTheta, s) - std::abs(x1 - x2);
        record_case(r, margin,
                    "i=" + std::to_string(i) + " word=" + word_to_string(cell.word) +
                        " x1=" + g12(x1) + " x2=" + g12(x2) + " s=" + std::to_string(s),
                    kCheckTol);
      }
    }
  }
  finalize(r);
  return r;
}

CheckResult check_aperiodicity(const SystemParams& p) {
  CheckResult r;
  r.check = "aperiodicity_cells";
  r.params = sys_params(p);
  const double m1 = cell_measure(1, p);
  const double m2 = cell_measure(2, p);
  record_case(r, m1, "measure{R=1}=" + g12(m1), kCheckTol);
  record_case(r, m2, "measure{R=2}=" + g12(m2), kCheckTol);
  r.pass = m1 > 0.0 && m2 > 0.0;
  return r;
}

namespace {

// ln k! cache, grown on demand; the sweeps revisit the same range for every n.
const double* lgamma_table(long upto) {
  static thread_local std::vector<double> lg{0.0};
  while (static_cast<long>(lg.size()) <= upto)
    lg.push_back(std::lgamma(static_cast<double>(lg.size()) + 1.0));
  return lg.data();
}

}  // namespace

HoeffdingReport hoeffding_report(long n, double p0, const SystemParams& p) {
  if (n < 1) throw std::domain_error("hoeffding_report: n must be >= 1");
  if (!(p0 > 0.0 && p0 < p.p1))
    throw std::domain_error("hoeffding_report: need 0 < p0 < p1, got p0 = " +
                            std::to_string(p0) + ", p1 = " + std::to_string(p.p1));

  const double k0 = p0 * static_cast<double>(n);
  const long kmax = static_cast<long>(std::floor(k0 + 1e-9));
  const double* lg = lgamma_table(n);
  const double lp1 = std::log(p.p1), lp2 = std::log(p.p2);

  // Log binomial terms are increasing up to the mode n p1 > k0, so the last
  // term dominates; sum exp(term - max) with compensated accumulation.
  auto log_term = [&](long k) {
    return lg[n] - lg[k] - lg[n - k] + k * lp1 + (n - k) * lp2;
  };
  const double m = log_term(kmax);
  double sum = 0.0, comp = 0.0;
  for (long k = 0; k <= kmax; ++k) {
    const double t = std::exp(log_term(k) - m);
    const double y = t - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  const double log_exact = m + std::log(sum);
  const double log_bound = -2.0 * n * (p.p1 - p0) * (p.p1 - p0);

  HoeffdingReport rep;
  rep.n = n;
  rep.p0 = p0;
  rep.k0 = k0;
  rep.exact_tail = std::exp(log_exact);
  rep.bound = std::exp(log_bound);
  rep.log_exact = log_exact;
  rep.log_bound = log_bound;
  rep.holds = log_exact <= log_bound + 1e-9;
  return rep;
}

bool hoeffding_bound_holds(const HoeffdingReport& r) {
  return r.exact_tail <= r.bound * (1.0 + 1e-9);
}

CheckResult check_hoeffding_sweep(long n_max, double p0, const SystemParams& p) {
  CheckResult r;
  r.check = "hoeffding_sweep";
  r.params = sys_params(p) + " p0=" + g12(p0) + " n_max=" + std::to_string(n_max);
  for (long n = 1; n <= n_max; ++n) {
    const HoeffdingReport rep = hoeffding_report(n, p0, p);
    const double margin = rep.log_bound - rep.log_exact;
    record_case(r, margin,
                "n=" + std::to_string(n) + " log_exact=" + g12(rep.log_exact) +
                    " log_bound=" + g12(rep.log_bound),
                1e-9);
  }
  finalize(r, 1e-9);
  return r;
}

double deriv_chain(const SymbolString& word, double x, const SystemParams& p) {
  const int L = word.length();
  if (L < 1) throw std::domain_error("deriv_chain: word must be nonempty");
  if (!(x > 0.5 && x <= 1.0))
    throw std::domain_error("deriv_chain: x must lie in (1/2, 1], got " +
                            std::to_string(x));
  double chain = 2.0;
  double cur = 2.0 * x - 1.0;
  for (int k = 1; k < L; ++k) {
    if (cur > 0.5 + 1e-12)
      throw std::domain_error("deriv_chain: orbit leaves [0,1/2] before the word ends; "
                              "the word is not the return itinerary of x");
    const double xc = std::min(cur, 0.5);
    const MapParameter& m = p.map_of(word.s[static_cast<std::size_t>(k)] == Symbol::A);
    chain *= lsv_deriv(m, xc, 1, BranchId::left);
    cur = lsv_eval(m, xc);
  }
  if (cur <= 0.5 - 1e-9)
    throw std::domain_error("deriv_chain: orbit has not returned after the word; "
                            "the word is not the return itinerary of x");
  return chain;
}

DistortionReport distortion_scan(const SystemParams& p, int i_max, int pairs_per_cell,
                                 std::uint64_t seed) {
  if (!p.strict_regime)
    throw std::domain_error(
        "distortion_scan: the distortion analysis covers the strict regime only");
  if (i_max < 1 || i_max > 16)
    throw std::domain_error("distortion_scan: i_max must lie in [1,16]");
  if (pairs_per_cell < 1)
    throw std::domain_error("distortion_scan: need at least one pair per cell");

  DistortionReport rep;
  rep.i_max = i_max;
  rep.contraction_violations = 0;
  SplitMix64 rng(seed);
  for (int i = 1; i <= i_max; ++i) {
    for (const TowerCell& cell : base_partition(i, p)) {
      const double om = 0.5 * (cell.omega.lo + cell.omega.hi);
      const double lo = cell.xband.lo, hi = cell.xband.hi;
      for (int q = 0; q < pairs_per_cell; ++q) {
        const double x1 = lo + (hi - lo) * (0.02 + 0.96 * rng.next_double());
        const double x2 = lo + (hi - lo) * (0.02 + 0.96 * rng.next_double());
        if (x1 == x2) continue;
        const double d1 = deriv_chain(cell.word, x1, p);
        const double d2 = deriv_chain(cell.word, x2, p);
        const double ratio = d1 > d2 ? d1 / d2 : d2 / d1;
        const int s_pair = separation_time(SkewPoint{x1, om}, SkewPoint{x2, om}, p);
        if (s_pair < 1) continue;  // never separated within the cap
        if (std::abs(x1 - x2) > std::pow(kTheta, s_pair) + 1e-12)
          ++rep.contraction_violations;
        rep.pairs.push_back(DistortionPair{i, word_to_string(cell.word), x1, x2,
                                           ratio - 1.0, s_pair, s_pair - 1,
                                           std::abs(x1 - x2)});
      }
    }
  }

  rep.c_estimate = 0.0;
  rep.c_first_half = 0.0;
  const std::size_t half = rep.pairs.size() / 2;
  for (std::size_t q = 0; q < rep.pairs.size(); ++q) {
    const double c =
        rep.pairs[q].ratio_minus_1 / std::pow(kTheta, rep.pairs[q].s_images);
    rep.c_estimate = std::max(rep.c_estimate, c);
    if (q < half) rep.c_first_half = std::max(rep.c_first_half, c);
  }
  rep.stable = rep.c_estimate <= 0.0 ||
               (rep.c_estimate - rep.c_first_half) <= 0.1 * rep.c_estimate;
  return rep;
}

SchwarzianReport schwarzian_scan(const MapParameter& m, int grid_points) {
  if (grid_points < 8)
    throw std::domain_error("schwarzian_scan: need at least 8 grid points");
  SchwarzianReport rep;
  rep.gamma = m.gamma;
  rep.has_threshold = m.gamma > 1.0;
  rep.threshold_scan = kNaN;
  rep.threshold_closed = kNaN;
  rep.threshold_gap = kNaN;

  double threshold = -1.0;
  if (rep.has_threshold) {
    rep.threshold_closed = schwarzian_positive_threshold(m.gamma);
    // One sign change is guaranteed; bisect it to solver precision.
    double lo = 1e-12, hi = 0.5 * (1.0 - 1e-12);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (schwarzian(m, mid) > 0.0 ? lo : hi) = mid;
    }
    rep.threshold_scan = 0.5 * (lo + hi);
    rep.threshold_gap = std::abs(rep.threshold_scan - rep.threshold_closed);
    threshold = rep.threshold_scan;
  }

  bool ok = true;
  for (int k = 1; k <= grid_points; ++k) {
    const double x = 0.5 * k / (grid_points + 1);
    if (std::abs(x - threshold) < 1e-9) continue;  // too close to call the sign
    const double s = schwarzian(m, x);
    const bool expect_positive = rep.has_threshold && x < threshold;
    if (expect_positive ? !(s > 0.0) : !(s < 0.0)) ok = false;
  }
  rep.sign_pattern_ok = ok && (!rep.has_threshold || rep.threshold_gap <= 1e-6);
  return rep;
}

SuiteResult lemma_suite(const SystemParams& p, int depth, long sampled_words,
                        std::uint64_t seed) {
  SuiteResult suite;
  suite.checks.push_back(check_domination(p.alpha, p.beta, 10000));
  suite.checks.push_back(check_monotone_pair(p.alpha, p.beta, 200));
  suite.checks.push_back(check_rough_bounds(p, depth));
  suite.checks.push_back(check_k0(p, depth));
  suite.checks.push_back(
      check_rough_bounds_sampled(p, {16, 32, 64, 128, 256, 512}, sampled_words, seed));
  suite.checks.push_back(check_contraction(p, std::min(8, depth), 4, seed + 1));
  suite.checks.push_back(check_aperiodicity(p));
  suite.checks.push_back(check_hoeffding_sweep(500, 0.75 * p.p1, p));

  for (const MapParameter& m : {p.alpha, p.beta}) {
    const SchwarzianReport sr = schwarzian_scan(m, 2000);
    CheckResult c;
    c.check = m.gamma == p.alpha.gamma ? "schwarzian_alpha" : "schwarzian_beta";
    c.params = "gamma=" + g12(m.gamma);
    c.n_cases = 2000;
    c.worst_margin = sr.has_threshold ? 1e-6 - sr.threshold_gap : 0.0;
    c.pass = sr.sign_pattern_ok;
    if (!c.pass)
      c.counterexamples.push_back("threshold_scan=" + g12(sr.threshold_scan) +
                                  " closed=" + g12(sr.threshold_closed));
    suite.checks.push_back(c);
  }

  suite.pass = true;
  for (const CheckResult& c : suite.checks) suite.pass = suite.pass && c.pass;
  return suite;
}

}  // namespace rimlab

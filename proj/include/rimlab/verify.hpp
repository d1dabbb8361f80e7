#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rimlab/system.hpp"
#include "rimlab/tower.hpp"

namespace rimlab {

// Result of one structural check.  worst_margin is the smallest slack seen
// over all cases (negative means a violation); the first few violating cases
// are kept verbatim so a failure is diagnosable from the ledger alone.
struct CheckResult {
  std::string check;
  std::string params;
  long n_cases = 0;
  double worst_margin = 0.0;
  bool pass = false;
  std::vector<std::string> counterexamples;
};

// Pointwise domination of the smaller-parameter map over the larger one on
// the left branch: T_lo >= T_hi on [0, 1/2], strict in the interior, equal
// at 0 and 1/2.  Fails by construction when called with lo.gamma > hi.gamma,
// which is the suite's negative control.
CheckResult check_domination(const MapParameter& lo, const MapParameter& hi,
                             int grid_points);

// Monotone coupling consequence: x <= y implies T_hi(x) <= T_lo(y) on the
// left branch (checked on a lattice of ordered pairs).
CheckResult check_monotone_pair(const MapParameter& lo, const MapParameter& hi,
                                int grid_points);

// Sandwich bounds on backward levels: for every word of length n-1,
// (alpha ladder)_n <= x_n(word) <= (beta ladder)_n, exhaustively over all
// words with n <= depth, tolerance 1e-12.  The ladder arguments are exposed
// so a corrupted ladder can serve as a negative control.
CheckResult check_rough_bounds(const SystemParams& p, int depth);
CheckResult check_rough_bounds_against(const SystemParams& p, int depth,
                                       const std::vector<double>& lower_ladder,
                                       const std::vector<double>& upper_ladder);

// The same bounds on sampled words at the listed depths.
CheckResult check_rough_bounds_sampled(const SystemParams& p,
                                       const std::vector<int>& depths, long words,
                                       std::uint64_t seed);

// Letter-count refinement: a word of length n-1 containing more than K0
// letters A satisfies x_n <= (alpha ladder)_{K0}; the binding instance
// K0 = #A - 1 is checked exhaustively for n <= depth (level 0 of a ladder
// counts as 1).
CheckResult check_k0(const SystemParams& p, int depth);
CheckResult check_k0_against(const SystemParams& p, int depth,
                             const std::vector<double>& alpha_ladder);

// Separation-time contraction: points of a common base-partition cell obey
// |x1 - x2| <= theta^s with theta = 1/2 and s the pair's separation time.
// Pairs are drawn uniformly inside cells of depth <= i_max at the cylinder
// midpoint.
CheckResult check_contraction(const SystemParams& p, int i_max, int pairs_per_cell,
                              std::uint64_t seed);

// Positivity of the first two return-time level sets (aperiodicity of the
// induced structure).
CheckResult check_aperiodicity(const SystemParams& p);

// Large deviation control of the letter counts.  K0 = p0 n; exact_tail is
// Pr(#A <= K0) under P(A) = p1, summed in log space with compensated
// accumulation; the bound is exp(-2 n (p1 - p0)^2).
struct HoeffdingReport {
  long n;
  double p0;
  double k0;
  double exact_tail;
  double bound;
  double log_exact;  // the comparison is done in log scale, where deep tails
  double log_bound;  // cannot underflow
  bool holds;
};

HoeffdingReport hoeffding_report(long n, double p0, const SystemParams& p);
bool hoeffding_bound_holds(const HoeffdingReport& r);

// Exhaustive sweep n = 1 .. n_max for one (p0, p1) pair.
CheckResult check_hoeffding_sweep(long n_max, double p0, const SystemParams& p);

// Derivative of the return map along the orbit coded by `word` starting at
// x in (1/2, 1]: the affine factor 2 of the first step times the left-branch
// derivatives along the remaining word.  Always >= 2.  Throws if the orbit
// of x does not follow the return itinerary the word describes.
double deriv_chain(const SymbolString& word, double x, const SystemParams& p);

// Distortion of the return map over its cells: pairs (x1, x2) inside one
// cell at the cylinder midpoint base point, ratio of derivative chains
// normalised to >= 1, compared against theta^(separation of the images).
struct DistortionPair {
  int depth;
  std::string word;
  double x1, x2;
  double ratio_minus_1;   // >= 0
  int s_pair;             // separation time of the pair
  int s_images;           // separation time of the images (s_pair - 1)
  double gap;             // |x1 - x2|
};

struct DistortionReport {
  std::vector<DistortionPair> pairs;
  double c_estimate;       // max (ratio - 1) / theta^s_images
  double c_first_half;     // same over the first half of the sample
  bool stable;             // the two agree within 10%
  long contraction_violations;
  int i_max;
};

inline constexpr double kTheta = 0.5;

DistortionReport distortion_scan(const SystemParams& p, int i_max, int pairs_per_cell,
                                 std::uint64_t seed);

// Sign structure of the Schwarzian derivative on the left branch: negative
// on all of (0, 1/2) for gamma <= 1; for gamma > 1 positive below the
// closed-form threshold and negative above it.  The scan locates the sign
// change on a grid, refines it by bisection and compares with the closed
// form to 1e-6.
struct SchwarzianReport {
  double gamma;
  bool sign_pattern_ok;
  bool has_threshold;
  double threshold_scan;     // NaN when no threshold exists
  double threshold_closed;   // NaN when no threshold exists
  double threshold_gap;      // |scan - closed form|
};

SchwarzianReport schwarzian_scan(const MapParameter& m, int grid_points);

// The full structural suite at the given word depth (exhaustive checks) plus
// sampled checks beyond it.  pass is the conjunction.
struct SuiteResult {
  std::vector<CheckResult> checks;
  bool pass = false;
};

SuiteResult lemma_suite(const SystemParams& p, int depth = 12, long sampled_words = 10000,
                        std::uint64_t seed = 7);

}  // namespace rimlab

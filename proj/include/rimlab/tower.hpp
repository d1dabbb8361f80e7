#pragma once

#include <cstdint>
#include <vector>

#include "rimlab/system.hpp"

namespace rimlab {

// Left-branch backward orbit anchored at 1/2.  For a word w = (s_0 .. s_{L-1})
// the fibre levels are
//
//   x_1 = 1/2,   x_k = invert_left(gamma(s_0), x_{k-1} of the shifted word),
//
// i.e. x_k depends on the first k-1 symbols, with the innermost inversion
// using the deepest of them.  The primed levels x'_k = (x_k of the shifted
// word + 1) / 2 transport the ladder to the right half; x'_0 = 1 and
// x'_1 = 3/4 hold for every word.
//
// Vectors are 1-indexed by level: x[k] holds x_k for k = 1 .. L+1 (x[0] is
// NaN padding), xp[k] holds x'_k for k = 0 .. L.
struct BackwardOrbit {
  SymbolString word;
  std::vector<double> x;
  std::vector<double> xp;
};

BackwardOrbit random_backward(const SymbolString& word, const SystemParams& p);

// Deepest level x_{L+1} of a word alone, one inversion per symbol.  This is
// the linear-cost entry point for bulk sampling; the full BackwardOrbit
// table costs one inversion per (level, symbol) pair.
double backward_level(const SymbolString& word, const SystemParams& p);

// Constant-parameter ladder x_1 .. x_n of the map with parameter m, again
// 1-indexed with v[0] = NaN.  These are the comparison sequences of the
// sandwich bounds: for any word, the alpha ladder sits below the word's
// ladder and the beta ladder above it, level by level (a larger exponent
// means a stickier neutral point, so the backward orbit decays slower).
std::vector<double> pure_backward(const MapParameter& m, int n);

// Exact expectation E(x_n) over all words of length n-1, by depth-first
// enumeration of the binary tree with the inversion chain carried along the
// path.  The chain value at depth d is the level x_{d+1} of the *reversed*
// prefix; summing over all nodes of a level visits each word's reversal
// exactly once, and the product measure is reversal-invariant, so the
// accumulated sums equal the defining ones term by term.  Cost is one
// inversion per node, 2^n nodes total; n > 22 is refused.
double expectation_exact(int n, const SystemParams& p);

inline constexpr int kMaxExactLevel = 22;

// All levels at once: table[k] = E(x_k) for k = 1 .. n_max (1-indexed, NaN
// pad at 0), from a single traversal.
std::vector<double> expectation_exact_table(int n_max, const SystemParams& p);

// Monte Carlo estimates of E(x_k) for all k = 1 .. k_max from `samples`
// independent words.  Each sample folds one i.i.d. symbol stream through the
// inversion chain, so every level of one chain is a valid draw of the
// corresponding x_k (reversal again); means over samples are unbiased for
// every k simultaneously.  Work is laid out in 256 fixed batches merged in
// index order, so results are bit-identical for any thread count.
struct McMoments {
  std::vector<double> mean;  // 1-indexed by level
  std::vector<double> se;    // standard error of the mean
  long samples = 0;
};

McMoments expectation_mc_table(int k_max, long samples, std::uint64_t seed,
                               const SystemParams& p, int threads = 1);

struct McValue {
  double value;
  double se;
};

// Single-level convenience wrapper around the chain estimator.
McValue expectation_mc(int n, long samples, std::uint64_t seed, const SystemParams& p,
                       int threads = 1);

// Merged expectation table: exact levels up to exact_upto, Monte Carlo
// beyond (se = 0 on the exact range).
struct ExpectationTable {
  std::vector<double> e;   // 1-indexed by level
  std::vector<double> se;
  int exact_upto = 0;
  long mc_samples = 0;

  int max_level() const { return static_cast<int>(e.size()) - 1; }
};

ExpectationTable build_expectation_table(int k_max, long samples, std::uint64_t seed,
                                         const SystemParams& p, int threads = 1,
                                         int exact_upto = kMaxExactLevel);

// Annealed measure of the return-time level set {R = i}:
//   cell_measure(1) = 1/4,
//   cell_measure(i) = (E(x_{i-1}) - E(x_i)) / 2   for i >= 2.
double cell_measure(int i, const ExpectationTable& table);
double cell_measure(int i, const SystemParams& p);  // exact, needs i <= 23

// Tail sums tail(n) = sum_{k > n} measure{R > k} = (1/2) sum_{k > n} E(x_k),
// truncated by the rule: keep adding terms until the next term falls below
// 1e-4 of the running sum and at least 4n terms beyond n have been taken
// (k >= 4n).  The discarded remainder is bounded through the sandwich
// E(x_k) <= (beta ladder)_k <= C k^(-1/beta), with C read off the top half of
// the computed beta ladder; the bound diverges for beta >= 1 and is reported
// as such.  The bound decays an order slower than the true remainder, so the
// remainder_small flag is conservative and routinely off even when the
// truncated value is accurate to a few percent.
struct TailEntry {
  int n;
  double value;
  int k_used;             // last level included
  bool converged;         // stopping rule satisfied inside the table
  double remainder_bound; // certified bound on the discarded part of value
  bool remainder_small;   // remainder_bound <= 1% of value
};

struct TailTable {
  std::vector<TailEntry> rows;
};

TailTable tail_Rhat(const std::vector<int>& ns, const SystemParams& p,
                    const ExpectationTable& table);

// First return structure over the right half Delta_0 = (1/2, 1] x [0, 1).
// The return time of (x, omega) is the smallest i with x > x'_i(omega); the
// level set {R = i} meets each depth-i symbol cylinder in an exact rectangle
// (x'_i, x'_{i-1}] x cylinder, because x'_i depends only on symbols 1..i-1
// of omega.
int return_time(const SkewPoint& z, const SystemParams& p, int cap = 1 << 20);

struct TowerCell {
  int depth;          // return time i >= 1
  SymbolString word;  // symbols 0 .. i-1 of the base cylinder
  Interval omega;     // base cylinder of the word
  Interval xband;     // fibre band (lo, hi], lo = x'_i, hi = x'_{i-1}
  double measure;     // product of the side lengths
};

// The 2^i cells of depth exactly i.  Splitting on symbol 0 keeps each cell's
// base an interval even though the fibre band only depends on symbols 1..i-1.
std::vector<TowerCell> base_partition(int i, const SystemParams& p);

// One application of the return map F(z) = S^{R(z)}(z), reporting the return
// time taken.
struct ReturnStep {
  SkewPoint z;
  int steps;
};

ReturnStep return_map(const SkewPoint& z, const SystemParams& p);

// Number of return map iterations until the two points land in different
// cells of the base partition: 0 if they already do, 1 + separation of the
// images otherwise.  Points that fail to separate within `cap` returns give
// -1 (the caller decides whether that is an error).
int separation_time(const SkewPoint& z1, const SkewPoint& z2, const SystemParams& p,
                    int cap = 64);

}  // namespace rimlab

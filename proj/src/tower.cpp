#include "rimlab/tower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rimlab/parallel.hpp"

namespace rimlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Inversion chain of a symbol range [first, last): the level x_{len+1}
// reached by folding the symbols with the deepest one innermost.
double fold_levels(const std::vector<Symbol>& s, std::size_t first, std::size_t last,
                   const SystemParams& p) {
  double t = 0.5;
  for (std::size_t j = last; j > first; --j)
    t = invert_left(p.map_of(s[j - 1] == Symbol::A), t);
  return t;
}

}  // namespace

BackwardOrbit random_backward(const SymbolString& word, const SystemParams& p) {
  const std::size_t L = word.s.size();
  BackwardOrbit bo;
  bo.word = word;
  bo.x.assign(L + 2, kNaN);
  bo.xp.assign(L + 1, kNaN);
  bo.x[1] = 0.5;
  for (std::size_t k = 2; k <= L + 1; ++k)
    bo.x[k] = fold_levels(word.s, 0, k - 1, p);
  bo.xp[0] = 1.0;
  for (std::size_t k = 1; k <= L; ++k)
    bo.xp[k] = (fold_levels(word.s, 1, k, p) + 1.0) / 2.0;
  return bo;
}

double backward_level(const SymbolString& word, const SystemParams& p) {
  return fold_levels(word.s, 0, word.s.size(), p);
}

std::vector<double> pure_backward(const MapParameter& m, int n) {
  if (n < 1) throw std::domain_error("pure_backward: n must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(n) + 1, kNaN);
  v[1] = 0.5;
  for (int k = 2; k <= n; ++k)
    v[static_cast<std::size_t>(k)] = invert_left(m, v[static_cast<std::size_t>(k) - 1]);
  return v;
}

namespace {

void exact_dfs(int depth, double value, double weight, int n_max, const SystemParams& p,
               std::vector<double>& acc) {
  acc[static_cast<std::size_t>(depth) + 1] += weight * value;
  if (depth + 1 >= n_max) return;
  exact_dfs(depth + 1, invert_left(p.alpha, value), weight * p.p1, n_max, p, acc);
  exact_dfs(depth + 1, invert_left(p.beta, value), weight * p.p2, n_max, p, acc);
}

}  // namespace

std::vector<double> expectation_exact_table(int n_max, const SystemParams& p) {
  if (n_max < 1) throw std::domain_error("expectation_exact_table: n_max must be >= 1");
  if (n_max > kMaxExactLevel)
    throw std::invalid_argument(
        "expectation_exact_table: exact enumeration visits 2^(n-1) words; n = " +
        std::to_string(n_max) + " exceeds the supported maximum " +
        std::to_string(kMaxExactLevel) + ", use the Monte Carlo estimator instead");
  std::vector<double> acc(static_cast<std::size_t>(n_max) + 1, 0.0);
  exact_dfs(0, 0.5, 1.0, n_max, p, acc);
  acc[0] = kNaN;
  return acc;
}

double expectation_exact(int n, const SystemParams& p) {
  return expectation_exact_table(n, p)[static_cast<std::size_t>(n)];
}

namespace {

constexpr int kMcBatches = 256;

struct BatchMoments {
  std::vector<double> sum;
  std::vector<double> sumsq;
};

}  // namespace

McMoments expectation_mc_table(int k_max, long samples, std::uint64_t seed,
                               const SystemParams& p, int threads) {
  if (k_max < 1) throw std::domain_error("expectation_mc_table: k_max must be >= 1");
  if (samples < 1) throw std::domain_error("expectation_mc_table: need samples >= 1");

  const std::size_t levels = static_cast<std::size_t>(k_max) + 1;
  std::vector<BatchMoments> parts(kMcBatches);
  const long base = samples / kMcBatches;
  const long rem = samples % kMcBatches;

  const MapParameter ma = p.alpha;
  const MapParameter mb = p.beta;
  const double p1 = p.p1;

  run_batches(kMcBatches, threads, [&](int b) {
    const long count = base + (b < rem ? 1 : 0);
    auto& part = parts[static_cast<std::size_t>(b)];
    part.sum.assign(levels, 0.0);
    part.sumsq.assign(levels, 0.0);
    SplitMix64 rng(SplitMix64::derive_stream(seed, static_cast<std::uint64_t>(b)));
    for (long s = 0; s < count; ++s) {
      double w = 0.5;
      for (int k = 2; k <= k_max; ++k) {
        const bool pick_a = rng.next_double() < p1;
        w = invert_left(pick_a ? ma : mb, w);
        part.sum[static_cast<std::size_t>(k)] += w;
        part.sumsq[static_cast<std::size_t>(k)] += w * w;
      }
    }
  });

  McMoments out;
  out.samples = samples;
  out.mean.assign(levels, kNaN);
  out.se.assign(levels, kNaN);
  std::vector<double> sum(levels, 0.0), sumsq(levels, 0.0);
  for (const auto& part : parts) {
    if (part.sum.empty()) continue;
    for (std::size_t k = 2; k < levels; ++k) {
      sum[k] += part.sum[k];
      sumsq[k] += part.sumsq[k];
    }
  }
  out.mean[1] = 0.5;
  out.se[1] = 0.0;
  const double S = static_cast<double>(samples);
  for (std::size_t k = 2; k < levels; ++k) {
    const double m = sum[k] / S;
    out.mean[k] = m;
    if (samples > 1) {
      double var = (sumsq[k] - S * m * m) / (S - 1.0);
      if (var < 0.0) var = 0.0;
      out.se[k] = std::sqrt(var / S);
    } else {
      out.se[k] = 0.0;
    }
  }
  return out;
}

McValue expectation_mc(int n, long samples, std::uint64_t seed, const SystemParams& p,
                       int threads) {
  if (n < 1) throw std::domain_error("expectation_mc: n must be >= 1");
  const McMoments m = expectation_mc_table(n, samples, seed, p, threads);
  return McValue{m.mean[static_cast<std::size_t>(n)], m.se[static_cast<std::size_t>(n)]};
}

ExpectationTable build_expectation_table(int k_max, long samples, std::uint64_t seed,
                                         const SystemParams& p, int threads,
                                         int exact_upto) {
  if (k_max < 1) throw std::domain_error("build_expectation_table: k_max must be >= 1");
  ExpectationTable t;
  t.exact_upto = std::min({exact_upto, k_max, kMaxExactLevel});
  const std::vector<double> exact = expectation_exact_table(t.exact_upto, p);
  t.e.assign(static_cast<std::size_t>(k_max) + 1, kNaN);
  t.se.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (int k = 1; k <= t.exact_upto; ++k)
    t.e[static_cast<std::size_t>(k)] = exact[static_cast<std::size_t>(k)];
  if (k_max > t.exact_upto) {
    const McMoments mc = expectation_mc_table(k_max, samples, seed, p, threads);
    t.mc_samples = samples;
    for (int k = t.exact_upto + 1; k <= k_max; ++k) {
      t.e[static_cast<std::size_t>(k)] = mc.mean[static_cast<std::size_t>(k)];
      t.se[static_cast<std::size_t>(k)] = mc.se[static_cast<std::size_t>(k)];
    }
  }
  return t;
}

double cell_measure(int i, const ExpectationTable& table) {
  if (i < 1) throw std::domain_error("cell_measure: i must be >= 1");
  if (i == 1) return 0.25;
  if (i > table.max_level())
    throw std::domain_error("cell_measure: level " + std::to_string(i) +
                            " beyond the expectation table (max " +
                            std::to_string(table.max_level()) + ")");
  return 0.5 * (table.e[static_cast<std::size_t>(i) - 1] - table.e[static_cast<std::size_t>(i)]);
}

double cell_measure(int i, const SystemParams& p) {
  if (i < 1) throw std::domain_error("cell_measure: i must be >= 1");
  if (i == 1) return 0.25;
  if (i > kMaxExactLevel)
    throw std::invalid_argument("cell_measure: exact form limited to i <= " +
                                std::to_string(kMaxExactLevel) +
                                ", build an expectation table for deeper levels");
  const std::vector<double> e = expectation_exact_table(i, p);
  return 0.5 * (e[static_cast<std::size_t>(i) - 1] - e[static_cast<std::size_t>(i)]);
}

TailTable tail_Rhat(const std::vector<int>& ns, const SystemParams& p,
                    const ExpectationTable& table) {
  const int k_max = table.max_level();
  const double beta = p.beta.gamma;

  // Comparison ladder for the certified remainder: E(x_k) <= (beta ladder)_k,
  // and the ladder is bounded by C k^(-1/beta) with C read off its top half.
  const std::vector<double> ladder = pure_backward(p.beta, k_max);

  TailTable out;
  out.rows.reserve(ns.size());
  for (int n : ns) {
    if (n < 1) throw std::domain_error("tail_Rhat: n must be >= 1");
    if (n >= k_max)
      throw std::domain_error("tail_Rhat: n = " + std::to_string(n) +
                              " leaves no terms inside the table (max level " +
                              std::to_string(k_max) + ")");
    double sum = 0.0;
    int k = n;
    bool converged = false;
    while (k < k_max) {
      ++k;
      sum += table.e[static_cast<std::size_t>(k)];
      if (k + 1 <= k_max && k >= 4 * n &&
          table.e[static_cast<std::size_t>(k) + 1] < 1e-4 * sum) {
        converged = true;
        break;
      }
    }
    double bound = std::numeric_limits<double>::infinity();
    if (beta < 1.0) {
      const double inv_b = 1.0 / beta;
      double c = 0.0;
      for (int j = std::max(1, k / 2); j <= k; ++j)
        c = std::max(c, ladder[static_cast<std::size_t>(j)] * std::pow(j, inv_b));
      bound = c * std::pow(k, 1.0 - inv_b) / (inv_b - 1.0);
    }
    const double value = 0.5 * sum;
    const double rem = 0.5 * bound;
    out.rows.push_back(TailEntry{n, value, k, converged, rem, rem <= 0.01 * value});
  }
  return out;
}

int return_time(const SkewPoint& z, const SystemParams& p, int cap) {
  if (!(z.x > 0.5 && z.x <= 1.0))
    throw std::domain_error("return_time: point must lie in the base (1/2, 1], got x = " +
                            std::to_string(z.x));
  double x = 2.0 * z.x - 1.0;
  double om = noise_step(z.omega, p);
  int i = 1;
  while (x <= 0.5) {
    if (i >= cap)
      throw std::runtime_error("return_time: no return within " + std::to_string(cap) +
                               " steps (x = " + std::to_string(z.x) + ")");
    x = lsv_eval(p.map_of(symbol_of(om, p) == Symbol::A), x);
    om = noise_step(om, p);
    ++i;
  }
  return i;
}

std::vector<TowerCell> base_partition(int i, const SystemParams& p) {
  if (i < 1) throw std::domain_error("base_partition: depth must be >= 1");
  if (i > 20)
    throw std::invalid_argument("base_partition: depth " + std::to_string(i) +
                                " would enumerate 2^" + std::to_string(i) + " cells");
  std::vector<TowerCell> cells;
  cells.reserve(std::size_t{1} << i);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << i); ++bits) {
    SymbolString w = word_from_bits(bits, i, p);
    // The fibre band depends only on symbols 1 .. i-1; the level x'_i is the
    // shifted word's level x_i moved to the right half.
    const double lo = (fold_levels(w.s, 1, static_cast<std::size_t>(i), p) + 1.0) / 2.0;
    const double hi =
        i >= 2 ? (fold_levels(w.s, 1, static_cast<std::size_t>(i) - 1, p) + 1.0) / 2.0 : 1.0;
    const Interval omega = cylinder_of(w, p);
    cells.push_back(TowerCell{i, std::move(w), omega, Interval{lo, hi},
                              (hi - lo) * omega.length()});
  }
  return cells;
}

ReturnStep return_map(const SkewPoint& z, const SystemParams& p) {
  if (!(z.x > 0.5 && z.x <= 1.0))
    throw std::domain_error("return_map: point must lie in the base (1/2, 1]");
  double x = 2.0 * z.x - 1.0;
  double om = noise_step(z.omega, p);
  int i = 1;
  while (x <= 0.5) {
    if (i >= (1 << 20))
      throw std::runtime_error("return_map: no return within 2^20 steps");
    x = lsv_eval(p.map_of(symbol_of(om, p) == Symbol::A), x);
    om = noise_step(om, p);
    ++i;
  }
  return ReturnStep{SkewPoint{x, om}, i};
}

namespace {

// Base-partition cell of z, identified by (return time, leading symbols).
struct CellId {
  int depth;
  std::vector<Symbol> word;

  bool operator==(const CellId& o) const { return depth == o.depth && word == o.word; }
};

CellId cell_of(const SkewPoint& z, const SystemParams& p) {
  CellId id;
  id.depth = return_time(z, p);
  id.word.reserve(static_cast<std::size_t>(id.depth));
  double om = z.omega;
  for (int k = 0; k < id.depth; ++k) {
    id.word.push_back(symbol_of(om, p));
    om = noise_step(om, p);
  }
  return id;
}

}  // namespace

int separation_time(const SkewPoint& z1, const SkewPoint& z2, const SystemParams& p,
                    int cap) {
  SkewPoint a = z1, b = z2;
  for (int hops = 0; hops <= cap; ++hops) {
    if (!(cell_of(a, p) == cell_of(b, p))) return hops;
    a = return_map(a, p).z;
    b = return_map(b, p).z;
  }
  return -1;
}

}  // namespace rimlab

#include "rimlab/correlation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rimlab/parallel.hpp"
#include "rimlab/rng.hpp"

namespace rimlab {

namespace {

double id_fn(double x) { return x; }
double ind_fn(double x) { return x >= 0.5 ? 1.0 : 0.0; }
double cos_fn(double x) { return std::cos(2.0 * std::numbers::pi * x); }

void require_holder_psi(const Observable& psi, bool allow) {
  if (!psi.holder && !allow)
    throw std::invalid_argument(
        "correlation: psi = '" + psi.name +
        "' is not Holder and the decay machinery does not cover it in the second "
        "slot; pass the explicit override to proceed anyway");
}

}  // namespace

Observable obs_identity() { return Observable{"x", &id_fn, true}; }
Observable obs_indicator_half() { return Observable{"indicator_half", &ind_fn, false}; }
Observable obs_cos2pi() { return Observable{"cos2pix", &cos_fn, true}; }

Observable observable_by_name(const std::string& name) {
  if (name == "x") return obs_identity();
  if (name == "indicator_half") return obs_indicator_half();
  if (name == "cos2pix") return obs_cos2pi();
  throw std::invalid_argument("unknown observable '" + name +
                              "'; available: x, indicator_half, cos2pix");
}

std::vector<double> correlation_operator(const SparseMat& M, const DensityVector& fstar,
                                         const Observable& phi, const Observable& psi,
                                         int n_max, bool allow_nonholder_psi) {
  if (n_max < 0) throw std::domain_error("correlation_operator: n_max must be >= 0");
  require_holder_psi(psi, allow_nonholder_psi);
  const PartitionGrid& g = fstar.grid;
  const int n = g.n;
  if (M.rows() != n || M.cols() != n)
    throw std::domain_error("correlation_operator: matrix and density grids disagree");

  Eigen::VectorXd phis(n), mass(n), u(n);
  double mean_phi = 0.0, mean_psi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = g.center(i);
    phis[i] = phi.f(c);
    mass[i] = fstar.mass(i);
    u[i] = psi.f(c) * mass[i];
    mean_phi += phis[i] * mass[i];
    mean_psi += u[i];
  }

  const SparseMat Mt = SparseMat(M.transpose());
  std::vector<double> cor(static_cast<std::size_t>(n_max) + 1);
  Eigen::VectorXd next(n);
  for (int lag = 0; lag <= n_max; ++lag) {
    cor[static_cast<std::size_t>(lag)] = phis.dot(u) - mean_phi * mean_psi;
    if (lag < n_max) {
      next.noalias() = Mt * u;
      u.swap(next);
    }
  }
  return cor;
}

namespace {

constexpr int kCorBatches = 64;
constexpr long kSampleStride = 256;

struct CorAccum {
  std::vector<double> prod;     // sum over samples of phi_n psi_0, per lag
  std::vector<double> prod_sq;
  double psi_sum = 0.0;
  double phi_sum = 0.0;         // over every recorded lag position
  long phi_count = 0;
  long samples = 0;
};

}  // namespace

McSeries correlation_mc(const SystemParams& p, const Observable& phi,
                        const Observable& psi, int n_max, long samples, long burn_in,
                        std::uint64_t seed, int threads, bool allow_nonholder_psi) {
  if (n_max < 0) throw std::domain_error("correlation_mc: n_max must be >= 0");
  if (samples < 2) throw std::domain_error("correlation_mc: need at least 2 samples");
  if (burn_in < 0) throw std::domain_error("correlation_mc: burn_in must be >= 0");
  require_holder_psi(psi, allow_nonholder_psi);

  const std::size_t lags = static_cast<std::size_t>(n_max) + 1;
  const long stride = std::max<long>(kSampleStride, n_max + 1);
  std::vector<CorAccum> parts(kCorBatches);
  const long base = samples / kCorBatches;
  const long rem = samples % kCorBatches;

  const MapParameter ma = p.alpha;
  const MapParameter mb = p.beta;
  const double p1 = p.p1;

  run_batches(kCorBatches, threads, [&](int b) {
    auto& acc = parts[static_cast<std::size_t>(b)];
    const long count = base + (b < rem ? 1 : 0);
    acc.prod.assign(lags, 0.0);
    acc.prod_sq.assign(lags, 0.0);
    acc.samples = count;
    SplitMix64 rng(SplitMix64::derive_stream(seed, static_cast<std::uint64_t>(b)));
    auto step = [&](double x) {
      const bool pick_a = rng.next_double() < p1;
      return lsv_eval(pick_a ? ma : mb, x);
    };
    double x = 0.3141592653589793;
    for (long t = 0; t < burn_in; ++t) x = step(x);
    for (long s = 0; s < count; ++s) {
      const double psi0 = psi.f(x);
      acc.psi_sum += psi0;
      const double phi0 = phi.f(x);
      acc.prod[0] += phi0 * psi0;
      acc.prod_sq[0] += phi0 * psi0 * phi0 * psi0;
      acc.phi_sum += phi0;
      ++acc.phi_count;
      for (long t = 1; t < stride; ++t) {
        x = step(x);
        if (t <= n_max) {
          const double ph = phi.f(x);
          const double pr = ph * psi0;
          acc.prod[static_cast<std::size_t>(t)] += pr;
          acc.prod_sq[static_cast<std::size_t>(t)] += pr * pr;
          acc.phi_sum += ph;
          ++acc.phi_count;
        }
      }
    }
  });

  CorAccum total;
  total.prod.assign(lags, 0.0);
  total.prod_sq.assign(lags, 0.0);
  for (const auto& part : parts) {
    for (std::size_t l = 0; l < lags; ++l) {
      total.prod[l] += part.prod[l];
      total.prod_sq[l] += part.prod_sq[l];
    }
    total.psi_sum += part.psi_sum;
    total.phi_sum += part.phi_sum;
    total.phi_count += part.phi_count;
    total.samples += part.samples;
  }

  const double S = static_cast<double>(total.samples);
  const double mean_psi = total.psi_sum / S;
  const double mean_phi = total.phi_sum / static_cast<double>(total.phi_count);

  McSeries out;
  out.samples = total.samples;
  out.value.assign(lags, 0.0);
  out.se.assign(lags, 0.0);
  for (std::size_t l = 0; l < lags; ++l) {
    const double m = total.prod[l] / S;
    out.value[l] = m - mean_phi * mean_psi;
    double var = (total.prod_sq[l] - S * m * m) / (S - 1.0);
    if (var < 0.0) var = 0.0;
    out.se[l] = std::sqrt(var / S);
  }
  return out;
}

ProductReport product_structure_test(const SystemParams& p, long orbit_len, int bins,
                                     std::uint64_t seed) {
  if (bins < 2) throw std::domain_error("product_structure_test: need at least 2 bins");
  if (orbit_len < 64L * bins * bins)
    throw std::domain_error("product_structure_test: orbit too short for the bin count");

  constexpr int kWindow = 64;   // lag below which base reconstructions share symbols
  constexpr long kBurn = 10000;

  SymbolOrbit orbit(0.25, seed, p);
  for (long t = 0; t < kBurn; ++t) orbit.advance();

  std::vector<long> counts(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins), 0);
  long recorded = 0;
  for (long t = 0; t < orbit_len; ++t) {
    if (t % kWindow == 0) {
      const double om = orbit.omega();
      int bx = static_cast<int>(orbit.x() * bins);
      int bo = static_cast<int>(om * bins);
      if (bx >= bins) bx = bins - 1;
      if (bo >= bins) bo = bins - 1;
      ++counts[static_cast<std::size_t>(bx) * static_cast<std::size_t>(bins) +
               static_cast<std::size_t>(bo)];
      ++recorded;
    }
    orbit.advance();
  }

  // Multinomial scale for the L1 distance of an empirical law on `bins` cells
  // from uniform: E ||phat - p||_1 <= sqrt(bins / samples).
  auto l1_vs_uniform = [bins](const std::vector<long>& row, long total) {
    double d = 0.0;
    for (int o = 0; o < bins; ++o)
      d += std::abs(static_cast<double>(row[static_cast<std::size_t>(o)]) / total -
                    1.0 / bins);
    return d;
  };

  std::vector<long> marginal(static_cast<std::size_t>(bins), 0);
  for (int bx = 0; bx < bins; ++bx)
    for (int bo = 0; bo < bins; ++bo)
      marginal[static_cast<std::size_t>(bo)] +=
          counts[static_cast<std::size_t>(bx) * static_cast<std::size_t>(bins) +
                 static_cast<std::size_t>(bo)];

  ProductReport rep{};
  rep.bins = bins;
  rep.recorded = recorded;
  rep.omega_l1 = l1_vs_uniform(marginal, recorded);
  rep.omega_scale = std::sqrt(static_cast<double>(bins) / static_cast<double>(recorded));
  rep.worst_slice_l1 = 0.0;
  rep.worst_slice_scale = 1.0;
  const long floor = recorded / (8L * bins);
  for (int bx = 0; bx < bins; ++bx) {
    std::vector<long> row(static_cast<std::size_t>(bins));
    long total = 0;
    for (int bo = 0; bo < bins; ++bo) {
      row[static_cast<std::size_t>(bo)] =
          counts[static_cast<std::size_t>(bx) * static_cast<std::size_t>(bins) +
                 static_cast<std::size_t>(bo)];
      total += row[static_cast<std::size_t>(bo)];
    }
    if (total < std::max(floor, 100L)) continue;  // too few visits to judge
    const double l1 = l1_vs_uniform(row, total);
    const double scale = std::sqrt(static_cast<double>(bins) / static_cast<double>(total));
    if (l1 * rep.worst_slice_scale > rep.worst_slice_l1 * scale) {
      rep.worst_slice_l1 = l1;
      rep.worst_slice_scale = scale;
    }
  }
  rep.pass = rep.omega_l1 < 5.0 * rep.omega_scale &&
             rep.worst_slice_l1 < 5.0 * rep.worst_slice_scale;
  return rep;
}

}  // namespace rimlab

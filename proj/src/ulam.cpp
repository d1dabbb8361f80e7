#include "rimlab/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rimlab {

PartitionGrid uniform_grid(int n) {
  if (n < 2) throw std::domain_error("uniform_grid: need at least 2 cells");
  PartitionGrid g{GridKind::uniform, n, {}};
  g.b.resize(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k)
    g.b[static_cast<std::size_t>(k)] = static_cast<double>(k) / n;
  g.b.front() = 0.0;
  g.b.back() = 1.0;
  return g;
}

PartitionGrid geometric_grid(int n, double q) {
  if (n < 2) throw std::domain_error("geometric_grid: need at least 2 cells");
  if (!(q >= 1.0)) throw std::domain_error("geometric_grid: exponent must be >= 1");
  PartitionGrid g{GridKind::geometric, n, {}};
  g.b.resize(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k)
    g.b[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(k) / n, q);
  g.b.front() = 0.0;
  g.b.back() = 1.0;
  return g;
}

double geometric_exponent(const SystemParams& p) {
  return std::max(2.0, 1.0 / p.alpha.gamma);
}

namespace {

// Accumulate the overlaps of one family of preimage cells pre[j] .. pre[j+1]
// (already sorted, covering [pre.front(), pre.back()]) against the grid, as
// triplets (i, j, overlap / width_i).  Two-pointer sweep, linear in n.
void accumulate_branch(const std::vector<double>& pre, const PartitionGrid& g,
                       std::vector<Eigen::Triplet<double>>& trips) {
  const int n = g.n;
  int i = 0;
  for (int j = 0; j < n; ++j) {
    const double plo = pre[static_cast<std::size_t>(j)];
    const double phi = pre[static_cast<std::size_t>(j) + 1];
    if (!(phi > plo)) continue;
    while (i < n && g.b[static_cast<std::size_t>(i) + 1] <= plo) ++i;
    for (int ii = i; ii < n; ++ii) {
      const double lo = std::max(plo, g.b[static_cast<std::size_t>(ii)]);
      const double hi = std::min(phi, g.b[static_cast<std::size_t>(ii) + 1]);
      if (hi > lo)
        trips.emplace_back(ii, j, (hi - lo) / g.width(ii));
      if (g.b[static_cast<std::size_t>(ii) + 1] >= phi) break;
    }
  }
}

}  // namespace

SparseMat ulam_matrix(const MapParameter& m, const PartitionGrid& g) {
  const int n = g.n;
  std::vector<double> left(static_cast<std::size_t>(n) + 1);
  std::vector<double> right(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    left[static_cast<std::size_t>(j)] = invert_left(m, g.b[static_cast<std::size_t>(j)]);
    right[static_cast<std::size_t>(j)] = (g.b[static_cast<std::size_t>(j)] + 1.0) / 2.0;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(6 * n));
  accumulate_branch(left, g, trips);
  accumulate_branch(right, g, trips);

  SparseMat M(n, n);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

SparseMat annealed_matrix(const SystemParams& p, const PartitionGrid& g) {
  const SparseMat A = ulam_matrix(p.alpha, g);
  const SparseMat B = ulam_matrix(p.beta, g);
  SparseMat M = p.p1 * A + p.p2 * B;
  M.makeCompressed();
  return M;
}

double DensityVector::mass_below(double x) const {
  double acc = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    const double lo = grid.b[static_cast<std::size_t>(i)];
    const double hi = grid.b[static_cast<std::size_t>(i) + 1];
    if (x <= lo) break;
    acc += v[i] * (std::min(x, hi) - lo);
  }
  return acc;
}

StationaryResult stationary_density(const SparseMat& M, const PartitionGrid& g,
                                    double tol, int max_iter) {
  const int n = g.n;
  if (M.rows() != n || M.cols() != n)
    throw std::domain_error("stationary_density: matrix and grid sizes disagree (" +
                            std::to_string(M.rows()) + " vs " + std::to_string(n) + ")");

  Eigen::VectorXd mass(n);
  for (int i = 0; i < n; ++i) mass[i] = g.width(i);

  const SparseMat Mt = SparseMat(M.transpose());
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  Eigen::VectorXd next(n);
  for (; it < max_iter; ++it) {
    next.noalias() = Mt * mass;
    next /= next.lpNorm<1>();
    residual = (next - mass).lpNorm<1>();
    mass.swap(next);
    if (residual < tol) {
      ++it;
      break;
    }
  }

  DensityVector d{g, Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) d.v[i] = mass[i] / g.width(i);
  return StationaryResult{std::move(d), residual, it, residual < tol};
}

}  // namespace rimlab

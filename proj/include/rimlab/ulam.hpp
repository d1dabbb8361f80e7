#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "rimlab/system.hpp"

namespace rimlab {

enum class GridKind { uniform, geometric };

// Partition of [0,1] into n cells by breakpoints b[0] = 0 < ... < b[n] = 1.
struct PartitionGrid {
  GridKind kind;
  int n;
  std::vector<double> b;

  double width(int i) const { return b[static_cast<std::size_t>(i) + 1] - b[static_cast<std::size_t>(i)]; }
  double center(int i) const { return 0.5 * (b[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i) + 1]); }
};

PartitionGrid uniform_grid(int n);

// Graded grid b[k] = (k/n)^q, concentrating cells near the neutral fixed
// point.  The product exponent for a system is max(2, 1/alpha), enough to
// resolve the invariant density spike x^(-alpha).
PartitionGrid geometric_grid(int n, double q);
double geometric_exponent(const SystemParams& p);

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Ulam discretisation of one map: entry (i, j) is the fraction of cell i
// that lands in cell j,
//
//   M(i, j) = |B_i cap T^{-1} B_j| / |B_i|.
//
// Preimage breakpoints are obtained by inverting each branch at the grid
// breakpoints once, so adjacent preimage intervals share endpoints exactly
// and every row sums to the total overlap |B_i| / |B_i| with no quadrature
// error beyond the breakpoint solves themselves.
SparseMat ulam_matrix(const MapParameter& m, const PartitionGrid& g);

// Mixture matrix p1 M_alpha + p2 M_beta: the one-step annealed transfer
// operator of the random system.
SparseMat annealed_matrix(const SystemParams& p, const PartitionGrid& g);

// Piecewise constant density on a grid; values are densities, so the total
// mass sum_i v_i width_i is 1 for a probability density.
struct DensityVector {
  PartitionGrid grid;
  Eigen::VectorXd v;

  double mass(int i) const { return v[i] * grid.width(i); }
  double mass_below(double x) const;
};

struct StationaryResult {
  DensityVector density;
  double residual;   // L1 distance between consecutive mass vectors
  int iterations;
  bool converged;
};

// Power iteration on the mass vector from the uniform density, renormalised
// every step, stopping when the L1 residual drops below tol.  Non-convergence
// within max_iter is reported through the flag, not an exception, so callers
// can decide (the command line tool exits with the solver-failure code).
StationaryResult stationary_density(const SparseMat& M, const PartitionGrid& g,
                                    double tol = 1e-12, int max_iter = 200000);

}  // namespace rimlab

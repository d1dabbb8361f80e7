#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "rimlab/ulam.hpp"

using namespace rimlab;

namespace {

const SystemParams kDefault(0.5, 0.7, 0.6, true);

double row_sum(const SparseMat& M, int i) {
  double s = 0.0;
  for (SparseMat::InnerIterator it(M, i); it; ++it) s += it.value();
  return s;
}

// Dense stationary oracle: solve (M^T - I) v = 0 with the normalization
// sum(v) = 1 spliced in as the last equation.  Direct linear algebra, no
// power iteration, so the two methods share nothing but the matrix.
Eigen::VectorXd dense_stationary_mass(const SparseMat& M) {
  const int n = static_cast<int>(M.rows());
  Eigen::MatrixXd A = Eigen::MatrixXd(M).transpose() - Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < n; ++j) A(n - 1, j) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  return A.partialPivLu().solve(rhs);
}

}  // namespace

TEST_CASE("grids: breakpoints, widths, validation") {
  const PartitionGrid u = uniform_grid(8);
  CHECK(u.n == 8);
  CHECK(u.b.front() == 0.0);
  CHECK(u.b.back() == 1.0);
  for (int i = 0; i < 8; ++i) CHECK(u.width(i) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(u.center(0) == doctest::Approx(0.0625).epsilon(1e-15));

  const PartitionGrid g = geometric_grid(4, 2.0);
  CHECK(g.b[1] == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(g.b[2] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.b[3] == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK(g.b.front() == 0.0);
  CHECK(g.b.back() == 1.0);
  for (int i = 1; i < 4; ++i) CHECK(g.width(i) > g.width(i - 1));

  CHECK_THROWS_AS(uniform_grid(1), std::domain_error);
  CHECK_THROWS_AS(geometric_grid(8, 0.5), std::domain_error);
  CHECK(geometric_exponent(kDefault) == 2.0);                    // 1/alpha
  CHECK(geometric_exponent(SystemParams(0.25, 0.7, 0.6, true)) == 4.0);
  CHECK(geometric_exponent(SystemParams(0.8, 0.9, 0.6, true)) == 2.0);  // floor at 2
}

TEST_CASE("ulam rows are stochastic by construction") {
  for (const auto& g : {uniform_grid(64), uniform_grid(257), geometric_grid(128, 2.0)}) {
    for (double gamma : {0.5, 0.7, 1.0}) {
      const SparseMat M = ulam_matrix(MapParameter(gamma), g);
      REQUIRE(M.rows() == g.n);
      REQUIRE(M.cols() == g.n);
      for (int i = 0; i < g.n; ++i) {
        CHECK(row_sum(M, i) == doctest::Approx(1.0).epsilon(1e-12));
        for (SparseMat::InnerIterator it(M, i); it; ++it) {
          CHECK(it.value() >= 0.0);
          CHECK(it.value() <= 1.0 + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("ulam entries follow the branch geometry") {
  // On a uniform grid the first cell [0, 1/N) maps into itself and the next
  // few cells only: T(x) < x (1 + (2x)^gamma) stays small near 0.  The
  // self-weight M(0,0) grows toward 1 as the grid refines, the signature of
  // the neutral fixed point.
  double prev = 0.0;
  for (int n : {64, 256, 1024}) {
    const SparseMat M = ulam_matrix(kDefault.map_of(true), uniform_grid(n));
    const double self = M.coeff(0, 0);
    CHECK(self > prev);
    prev = self;
  }
  CHECK(prev > 0.9);

  // The right branch of any map sends (1/2, 1] affinely onto (0, 1]: the
  // last cell of a 4-cell grid covers (3/4, 1], whose image is (1/2, 1],
  // split equally between the top two cells.
  const SparseMat M4 = ulam_matrix(MapParameter(1.0), uniform_grid(4));
  CHECK(M4.coeff(3, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(M4.coeff(3, 3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(M4.coeff(3, 0) == 0.0);
}

TEST_CASE("annealed matrix is the p-weighted convex combination") {
  const PartitionGrid g = uniform_grid(128);
  const SparseMat A = ulam_matrix(kDefault.map_of(true), g);
  const SparseMat B = ulam_matrix(kDefault.map_of(false), g);
  const SparseMat M = annealed_matrix(kDefault, g);
  for (int i = 0; i < g.n; ++i) {
    CHECK(row_sum(M, i) == doctest::Approx(1.0).epsilon(1e-12));
    for (SparseMat::InnerIterator it(M, i); it; ++it) {
      const double want = kDefault.p1 * A.coeff(i, it.col()) +
                          kDefault.p2 * B.coeff(i, it.col());
      CHECK(it.value() == doctest::Approx(want).epsilon(1e-13));
    }
  }
}

TEST_CASE("power iteration matches a dense direct solve") {
  const PartitionGrid g = uniform_grid(128);
  const SparseMat M = annealed_matrix(kDefault, g);
  const StationaryResult st = stationary_density(M, g, 1e-13, 200000);
  REQUIRE(st.converged);
  const Eigen::VectorXd oracle = dense_stationary_mass(M);
  for (int i = 0; i < g.n; ++i)
    CHECK(std::abs(st.density.mass(i) - oracle[i]) < 1e-8);
}

TEST_CASE("stationary density: normalization, positivity, spike at the origin") {
  const PartitionGrid g = geometric_grid(512, 2.0);
  const SparseMat M = annealed_matrix(kDefault, g);
  const StationaryResult st = stationary_density(M, g, 1e-12, 200000);
  REQUIRE(st.converged);
  CHECK(st.residual < 1e-12);
  CHECK(st.iterations > 0);
  double mass = 0.0;
  for (int i = 0; i < g.n; ++i) {
    CHECK(st.density.v[static_cast<std::size_t>(i)] >= 0.0);
    mass += st.density.mass(i);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  // The invariant density diverges like x^(-alpha) at 0: the first-cell
  // density dwarfs the bulk level.
  CHECK(st.density.v[0] > 5.0 * st.density.v[g.n / 2]);
  // mass_below agrees with summed cell masses at a breakpoint.
  double below = 0.0;
  for (int i = 0; i < g.n / 4; ++i) below += st.density.mass(i);
  CHECK(st.density.mass_below(g.b[static_cast<std::size_t>(g.n) / 4]) ==
        doctest::Approx(below).epsilon(1e-12));
}

TEST_CASE("single-map density at alpha = 1/2 lies deep in the neutral spike") {
  // For one map with gamma = 1/2 the invariant density behaves like
  // x^(-1/2): mass([0,1/8]) is well above mass([3/8,1/2]) already at modest
  // resolution.
  const SystemParams p(0.5, 0.7, 0.6, true);
  const PartitionGrid g = uniform_grid(4096);
  const SparseMat M = ulam_matrix(p.map_of(true), g);
  const StationaryResult st = stationary_density(M, g, 1e-10, 200000);
  REQUIRE(st.converged);
  const double low = st.density.mass_below(0.125);
  const double mid = st.density.mass_below(0.5) - st.density.mass_below(0.375);
  CHECK(low > 2.0 * mid);
}

TEST_CASE("doubling the iteration budget does not move a converged answer") {
  const PartitionGrid g = uniform_grid(256);
  const SparseMat M = annealed_matrix(kDefault, g);
  const StationaryResult a = stationary_density(M, g, 1e-12, 100000);
  const StationaryResult b = stationary_density(M, g, 1e-12, 200000);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  double l1 = 0.0;
  for (int i = 0; i < g.n; ++i) l1 += std::abs(a.density.mass(i) - b.density.mass(i));
  CHECK(l1 < 2e-12);
}

TEST_CASE("refinement shrinks the first-cell escape") {
  // Mass conservation row by row is exact at any resolution; what refines
  // is where mass near the fixed point goes.  The leading-cell content of
  // the stationary vector must grow monotonically with resolution for a
  // fixed reference scale.
  std::vector<double> below;
  for (int n : {128, 256, 512, 1024}) {
    const PartitionGrid g = uniform_grid(n);
    const StationaryResult st =
        stationary_density(ulam_matrix(kDefault.map_of(true), g), g, 1e-10, 200000);
    REQUIRE(st.converged);
    below.push_back(st.density.mass_below(1.0 / 64.0));
  }
  CHECK(below.back() > below.front());
  for (std::size_t k = 1; k < below.size(); ++k) CHECK(below[k] > below[k - 1] - 0.005);
}

TEST_CASE("beta = 1 annealed operator still has a normalizable fixed density") {
  const SystemParams p(0.5, 1.0, 0.6, false);
  double reference = 0.0;
  for (int n : {1024, 2048}) {
    const PartitionGrid g = uniform_grid(n);
    const StationaryResult st =
        stationary_density(annealed_matrix(p, g), g, 1e-9, 400000);
    REQUIRE(st.converged);
    double mass = 0.0;
    for (int i = 0; i < g.n; ++i) mass += st.density.mass(i);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    const double below = st.density.mass_below(1.0 / 16.0);
    CHECK(below > 0.0);
    CHECK(below < 0.5);
    if (reference > 0.0)
      CHECK(std::abs(below - reference) / reference < 0.15);  // stable under refinement
    reference = below;
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  const PartitionGrid g = uniform_grid(256);
  const SparseMat M = annealed_matrix(kDefault, g);
  const StationaryResult st = stationary_density(M, g, 1e-14, 3);
  CHECK_FALSE(st.converged);
  CHECK(st.iterations == 3);
  CHECK(st.residual > 1e-14);
}

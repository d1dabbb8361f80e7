#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rimlab/ulam.hpp"

namespace rimlab {

// Observable on [0,1].  The regularity tag gates where an observable may be
// used: the decay machinery needs Holder regularity in the second slot of a
// correlation, while merely bounded observables (indicators) are fine in the
// first slot.  Plain function pointers keep observable evaluation out of the
// allocator and the library observables are stateless anyway.
struct Observable {
  std::string name;
  double (*f)(double);
  bool holder;
};

Observable obs_identity();        // x          (Holder)
Observable obs_indicator_half();  // 1[1/2,1]   (bounded only)
Observable obs_cos2pi();          // cos(2 pi x) (Holder)

// Lookup by the names above ("x", "indicator_half", "cos2pix"); unknown
// names throw.
Observable observable_by_name(const std::string& name);

// Annealed correlations through the discretised transfer operator:
//
//   cor[n] = sum_i phi(c_i) u_i^(n)  -  mean(phi) mean(psi),
//
// where u^(0) is the stationary mass weighted by psi at cell centers and
// u^(n) advances by the operator.  psi must be Holder unless the caller
// explicitly overrides the gate.
std::vector<double> correlation_operator(const SparseMat& M, const DensityVector& fstar,
                                         const Observable& phi, const Observable& psi,
                                         int n_max, bool allow_nonholder_psi = false);

struct McSeries {
  std::vector<double> value;  // indexed by lag 0 .. n_max
  std::vector<double> se;
  long samples = 0;
};

// Direct orbit estimate of the same correlations: one long annealed orbit
// per batch, sampling windows of length n_max at a fixed stride (disjoint
// windows, so window products are close to independent).  Batched with a
// fixed layout and merged in index order: bit-identical for any thread
// count.
McSeries correlation_mc(const SystemParams& p, const Observable& phi,
                        const Observable& psi, int n_max, long samples, long burn_in,
                        std::uint64_t seed, int threads = 1,
                        bool allow_nonholder_psi = false);

// Empirical check that the stationary measure of the skew product is a
// product: the base marginal of a long orbit should be uniform, and the base
// distribution conditioned on any fibre bin should be uniform as well.  The
// orbit is driven by i.i.d. symbols and the base coordinate is reconstructed
// from the 64 upcoming symbols, so the histogram is subsampled at stride 64
// to decorrelate consecutive reconstructions.  Distances are compared to a
// multinomial fluctuation scale; `pass` requires every distance below
// 5 x scale.
struct ProductReport {
  int bins;
  long recorded;            // histogram samples after subsampling
  double omega_l1;          // base marginal vs uniform
  double omega_scale;
  double worst_slice_l1;    // worst conditional row vs uniform
  double worst_slice_scale; // scale of that row
  bool pass;
};

ProductReport product_structure_test(const SystemParams& p, long orbit_len, int bins,
                                     std::uint64_t seed);

}  // namespace rimlab

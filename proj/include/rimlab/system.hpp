#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rimlab/lsv.hpp"
#include "rimlab/rng.hpp"

namespace rimlab {

// Two-map random system: at each step an i.i.d. coin with P(A) = p1 selects
// the alpha map (symbol A) or the beta map (symbol B), alpha < beta.  The
// strict regime additionally requires beta < 1; systems with beta >= 1 are
// admitted only when the caller opts out of it.  alpha = beta is rejected as
// degenerate.
struct SystemParams {
  MapParameter alpha;
  MapParameter beta;
  double p1;
  double p2;
  bool strict_regime;

  SystemParams(double a, double b, double prob_a, bool strict = true);

  const MapParameter& map_of(bool is_alpha) const { return is_alpha ? alpha : beta; }
};

enum class Symbol : std::uint8_t { A = 0, B = 1 };

inline char symbol_char(Symbol s) { return s == Symbol::A ? 'A' : 'B'; }

// Finite word of symbols together with its probability
// weight = p1^(#A) p2^(#B).
struct SymbolString {
  std::vector<Symbol> s;
  double weight;

  int length() const { return static_cast<int>(s.size()); }
};

SymbolString make_word(std::vector<Symbol> symbols, const SystemParams& p);

// Word of length len whose k-th symbol is A when bit k of `bits` is 0.
SymbolString word_from_bits(std::uint64_t bits, int len, const SystemParams& p);

std::string word_to_string(const SymbolString& w);
SymbolString word_from_string(const std::string& text, const SystemParams& p);

// Point of the skew product: fibre coordinate x in [0,1], base coordinate
// omega in [0,1).
struct SkewPoint {
  double x;
  double omega;
};

// Half-open interval [lo, hi).
struct Interval {
  double lo;
  double hi;

  double length() const { return hi - lo; }
};

// Symbol read off the base point: A on [0, p1), B on [p1, 1).
Symbol symbol_of(double omega, const SystemParams& p);

// Base dynamics: the piecewise affine expansion
//   omega / p1          on [0, p1),
//   (omega - p1) / p2   on [p1, 1),
// which preserves Lebesgue measure on [0,1).  Rounding can push the second
// branch to 1.0 exactly; the result is clamped back below 1 so iterates stay
// in the domain.
double noise_step(double omega, const SystemParams& p);

// One step of the skew product: apply the map selected by symbol_of(omega)
// in the fibre and advance the base.
SkewPoint skew_step(const SkewPoint& z, const SystemParams& p);

// Orbit z, S(z), ..., S^n(z); the returned vector has length n + 1.
std::vector<SkewPoint> iterate(const SkewPoint& z0, int n, const SystemParams& p);

// Base cylinder [a, b) of the word: the set of omega whose first length(w)
// symbols spell w.  Built back to front, so endpoints of adjacent cylinders
// of the same length coincide exactly and the level sets tile [0,1) with no
// gaps or overlaps.
Interval cylinder_of(const SymbolString& w, const SystemParams& p);

// n i.i.d. symbols with P(A) = p1, drawn from the splitmix64 stream of
// `seed` starting at counter 0.
std::vector<Symbol> sample_symbols(int n, std::uint64_t seed, const SystemParams& p);

// Skew orbit driven by a fresh i.i.d. symbol stream.  The base coordinate is
// reconstructed each step from the 64 upcoming symbols (folded back to
// front, so the reconstruction error is 2^-64), instead of iterating a
// stored base point whose mantissa the expanding base map would exhaust
// after ~50 steps.  Consecutive reconstructions share 63 symbols and are
// strongly dependent up to lag 64; consumers that need decorrelated base
// samples should subsample at that stride.
class SymbolOrbit {
 public:
  SymbolOrbit(double x0, std::uint64_t seed, const SystemParams& p);

  double x() const { return x_; }
  double omega() const;           // reconstructed base coordinate
  Symbol current_symbol() const { return win_[static_cast<std::size_t>(head_)]; }
  SkewPoint state() const { return SkewPoint{x_, omega()}; }

  void advance();                 // one skew product step

 private:
  SystemParams p_;
  SplitMix64 rng_;
  std::vector<Symbol> win_;
  int head_ = 0;
  double x_;
};

}  // namespace rimlab

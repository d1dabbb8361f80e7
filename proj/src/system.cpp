#include "rimlab/system.hpp"

#include <cmath>
#include <stdexcept>

namespace rimlab {

SystemParams::SystemParams(double a, double b, double prob_a, bool strict)
    : alpha(a), beta(b), p1(prob_a), p2(1.0 - prob_a), strict_regime(strict) {
  if (!(a < b))
    throw std::domain_error(
        "system parameters require alpha < beta (alpha = beta is degenerate), got alpha = " +
        std::to_string(a) + ", beta = " + std::to_string(b));
  if (strict && !(b < 1.0))
    throw std::domain_error(
        "strict regime requires beta < 1, got beta = " + std::to_string(b) +
        "; construct with strict = false to admit beta >= 1");
  if (!(prob_a > 0.0 && prob_a < 1.0))
    throw std::domain_error("p1 must lie in the open interval (0,1), got " +
                            std::to_string(prob_a));
}

SymbolString make_word(std::vector<Symbol> symbols, const SystemParams& p) {
  double w = 1.0;
  for (Symbol s : symbols) w *= (s == Symbol::A ? p.p1 : p.p2);
  return SymbolString{std::move(symbols), w};
}

SymbolString word_from_bits(std::uint64_t bits, int len, const SystemParams& p) {
  if (len < 0 || len > 63)
    throw std::domain_error("word_from_bits: length must lie in [0,63]");
  std::vector<Symbol> s(static_cast<std::size_t>(len));
  for (int k = 0; k < len; ++k)
    s[static_cast<std::size_t>(k)] = (bits >> k) & 1 ? Symbol::B : Symbol::A;
  return make_word(std::move(s), p);
}

std::string word_to_string(const SymbolString& w) {
  std::string out;
  out.reserve(w.s.size());
  for (Symbol s : w.s) out.push_back(symbol_char(s));
  return out;
}

SymbolString word_from_string(const std::string& text, const SystemParams& p) {
  std::vector<Symbol> s;
  s.reserve(text.size());
  for (char c : text) {
    if (c == 'A')
      s.push_back(Symbol::A);
    else if (c == 'B')
      s.push_back(Symbol::B);
    else
      throw std::domain_error(std::string("word_from_string: invalid symbol '") + c +
                              "', expected 'A' or 'B'");
  }
  return make_word(std::move(s), p);
}

namespace {

void require_base_point(double omega, const char* who) {
  if (!(omega >= 0.0 && omega < 1.0))
    throw std::domain_error(std::string(who) + ": omega must lie in [0,1), got " +
                            std::to_string(omega));
}

}  // namespace

Symbol symbol_of(double omega, const SystemParams& p) {
  require_base_point(omega, "symbol_of");
  return omega < p.p1 ? Symbol::A : Symbol::B;
}

double noise_step(double omega, const SystemParams& p) {
  require_base_point(omega, "noise_step");
  double r = omega < p.p1 ? omega / p.p1 : (omega - p.p1) / p.p2;
  if (r >= 1.0) r = std::nextafter(1.0, 0.0);
  return r;
}

SkewPoint skew_step(const SkewPoint& z, const SystemParams& p) {
  const Symbol s = symbol_of(z.omega, p);
  return SkewPoint{lsv_eval(p.map_of(s == Symbol::A), z.x), noise_step(z.omega, p)};
}

std::vector<SkewPoint> iterate(const SkewPoint& z0, int n, const SystemParams& p) {
  if (n < 0) throw std::domain_error("iterate: n must be nonnegative");
  detail::require_unit_interval(z0.x, "iterate");
  require_base_point(z0.omega, "iterate");
  std::vector<SkewPoint> orbit;
  orbit.reserve(static_cast<std::size_t>(n) + 1);
  orbit.push_back(z0);
  for (int k = 0; k < n; ++k) orbit.push_back(skew_step(orbit.back(), p));
  return orbit;
}

Interval cylinder_of(const SymbolString& w, const SystemParams& p) {
  double lo = 0.0, hi = 1.0;
  for (auto it = w.s.rbegin(); it != w.s.rend(); ++it) {
    if (*it == Symbol::A) {
      lo = p.p1 * lo;
      hi = p.p1 * hi;
    } else {
      lo = p.p1 + p.p2 * lo;
      hi = p.p1 + p.p2 * hi;
    }
  }
  return Interval{lo, hi};
}

std::vector<Symbol> sample_symbols(int n, std::uint64_t seed, const SystemParams& p) {
  if (n < 0) throw std::domain_error("sample_symbols: n must be nonnegative");
  SplitMix64 rng(seed);
  std::vector<Symbol> s(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    s[static_cast<std::size_t>(k)] = rng.next_double() < p.p1 ? Symbol::A : Symbol::B;
  return s;
}

SymbolOrbit::SymbolOrbit(double x0, std::uint64_t seed, const SystemParams& p)
    : p_(p), rng_(seed), win_(64), x_(x0) {
  detail::require_unit_interval(x0, "SymbolOrbit");
  for (auto& s : win_) s = rng_.next_double() < p_.p1 ? Symbol::A : Symbol::B;
}

double SymbolOrbit::omega() const {
  // Fold the 64 buffered symbols back to front onto a fixed interior seed.
  // Each symbol contracts by p1 or p2 < 1, so the choice of seed moves the
  // result by at most 2^-64 of the cylinder the window determines.
  double w = 0.5;
  for (int k = 63; k >= 0; --k) {
    const Symbol s = win_[static_cast<std::size_t>((head_ + k) % 64)];
    w = s == Symbol::A ? p_.p1 * w : p_.p1 + p_.p2 * w;
  }
  return w;
}

void SymbolOrbit::advance() {
  const Symbol s = current_symbol();
  x_ = lsv_eval(p_.map_of(s == Symbol::A), x_);
  win_[static_cast<std::size_t>(head_)] = rng_.next_double() < p_.p1 ? Symbol::A : Symbol::B;
  head_ = (head_ + 1) % 64;
}

}  // namespace rimlab

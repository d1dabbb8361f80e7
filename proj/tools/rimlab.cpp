// rimlab: experiment front door.  Every command writes CSV/JSON artifacts
// stamped with the tool version, the full parameter set, the seed and
// generator when randomness was used, and the wall-clock runtime, so any
// figure can be reproduced from its own header block.
//
// Exit codes: 0 success, 1 a verification suite found a violation,
// 2 usage or parameter error, 3 numerical non-convergence.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rimlab/correlation.hpp"
#include "rimlab/lsv.hpp"
#include "rimlab/output.hpp"
#include "rimlab/power_law.hpp"
#include "rimlab/rng.hpp"
#include "rimlab/system.hpp"
#include "rimlab/tower.hpp"
#include "rimlab/ulam.hpp"
#include "rimlab/verify.hpp"
#include "rimlab/version.hpp"

namespace {

using namespace rimlab;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

struct SystemOpts {
  double alpha = 0.5;
  double beta = 0.7;
  double p1 = 0.6;
  bool no_strict = false;
};

void add_system_flags(CLI::App* cmd, SystemOpts& o) {
  cmd->add_option("--alpha", o.alpha, "exponent of the slow branch family")
      ->capture_default_str();
  cmd->add_option("--beta", o.beta, "exponent of the fast branch family")
      ->capture_default_str();
  cmd->add_option("--p1", o.p1, "probability of drawing the alpha map")
      ->capture_default_str();
  cmd->add_flag("--no-strict", o.no_strict,
                "admit beta >= 1 (the beta map alone then has only a sigma-finite "
                "invariant measure)");
}

SystemParams params_of(const SystemOpts& o) {
  return SystemParams(o.alpha, o.beta, o.p1, !o.no_strict);
}

RunMeta make_meta(const std::string& command, const SystemOpts& o,
                  std::vector<std::pair<std::string, std::string>> extra, bool has_seed,
                  std::uint64_t seed, int threads) {
  RunMeta m;
  m.command = command;
  m.params.emplace_back("alpha", format_full(o.alpha));
  m.params.emplace_back("beta", format_full(o.beta));
  m.params.emplace_back("p1", format_full(o.p1));
  m.params.emplace_back("strict", o.no_strict ? "0" : "1");
  for (auto& kv : extra) m.params.push_back(std::move(kv));
  m.has_seed = has_seed;
  m.seed = seed;
  m.threads = threads;
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot open output file '" + path + "'");
  return os;
}

// "runs/exp.csv" + "_tail" -> "runs/exp_tail.csv"
std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

// "runs/exp.csv" -> "runs/exp.json"
std::string with_ext(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + ext;
  return path.substr(0, dot) + ext;
}

void write_json_file(const std::string& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << "\n";
}

json fit_json(const PowerLawFit& f) {
  return json{{"exponent", f.exponent}, {"std_err", f.std_err}, {"r2", f.r2},
              {"n_lo", f.n_lo},         {"n_hi", f.n_hi},       {"points", f.points}};
}

json check_json(const CheckResult& c) {
  return json{{"check", c.check},
              {"params", c.params},
              {"n_cases", c.n_cases},
              {"worst_margin", c.worst_margin},
              {"pass", c.pass},
              {"counterexamples", c.counterexamples}};
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  SystemOpts sys;
  long steps = 1000;
  double x0 = 0.25;
  double omega0 = 0.0;
  bool omega_given = false;
  std::uint64_t seed = 42;
  std::string out = "simulate.csv";
};

int run_simulate(const SimulateOpts& o, int threads) {
  const SystemParams p = params_of(o.sys);
  if (o.steps < 0) throw std::domain_error("simulate: --steps must be >= 0");
  detail::require_unit_interval(o.x0, "simulate --x0");
  if (o.omega_given && !(o.omega0 >= 0.0 && o.omega0 < 1.0))
    throw std::domain_error("simulate: --omega0 must lie in [0,1)");

  Timer timer;
  RunMeta meta = make_meta(
      "simulate", o.sys,
      {{"steps", std::to_string(o.steps)},
       {"x0", format_full(o.x0)},
       {"omega0", o.omega_given ? format_full(o.omega0) : std::string("sampled")}},
      true, o.seed, threads);

  auto os = open_out(o.out);
  std::vector<std::string> header = {"step", "x", "omega", "symbol"};
  auto emit = [&](long step, double x, double omega, Symbol s) {
    os << step << ',' << format_full(x) << ',' << format_full(omega) << ','
       << symbol_char(s) << '\n';
  };

  // The rows are streamed, so the runtime stamp in the preamble is taken
  // before the write loop; it covers parameter validation only.  The loop
  // itself is the dominant cost for long orbits, which is fine for a stamp
  // meant to catch gross regressions.
  meta.runtime_seconds = timer.seconds();
  write_csv_preamble(os, meta);
  for (std::size_t c = 0; c < header.size(); ++c)
    os << header[c] << (c + 1 < header.size() ? "," : "\n");

  if (o.omega_given) {
    // Literal float orbit of the given base point.  The noise map doubles the
    // relative error of omega each step, so past ~50 steps the emitted
    // symbols decouple from the exact itinerary of the real number omega0;
    // the orbit is still a genuine orbit of a nearby point.
    SkewPoint z{o.x0, o.omega0};
    for (long t = 0;; ++t) {
      emit(t, z.x, z.omega, symbol_of(z.omega, p));
      if (t == o.steps) break;
      z = skew_step(z, p);
    }
  } else {
    SymbolOrbit orbit(o.x0, o.seed, p);
    for (long t = 0;; ++t) {
      emit(t, orbit.x(), orbit.omega(), orbit.current_symbol());
      if (t == o.steps) break;
      orbit.advance();
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------------- tower

struct TowerOpts {
  SystemOpts sys;
  int i_max = 6;
  std::string out = "tower.csv";
};

int run_tower(const TowerOpts& o, int threads) {
  const SystemParams p = params_of(o.sys);
  Timer timer;

  std::vector<std::vector<std::string>> rows;
  json depths = json::array();
  double total_measure = 0.0;
  double partial_er = 0.0;
  long n_cells = 0;
  for (int i = 1; i <= o.i_max; ++i) {
    auto cells = base_partition(i, p);
    std::sort(cells.begin(), cells.end(), [](const TowerCell& a, const TowerCell& b) {
      return a.omega.lo < b.omega.lo;
    });
    double level_measure = 0.0;
    for (const auto& c : cells) {
      rows.push_back({std::to_string(c.depth), word_to_string(c.word),
                      format_full(c.omega.lo), format_full(c.omega.hi),
                      format_full(c.xband.lo), format_full(c.xband.hi),
                      format_full(c.measure)});
      level_measure += c.measure;
    }
    depths.push_back(json{{"depth", i},
                          {"cells", cells.size()},
                          {"measure", level_measure},
                          {"x_lo", cells.front().xband.lo},
                          {"x_hi", cells.front().xband.hi}});
    total_measure += level_measure;
    partial_er += i * level_measure;
    n_cells += static_cast<long>(cells.size());
  }

  RunMeta meta = make_meta("tower", o.sys, {{"i_max", std::to_string(o.i_max)}}, false, 0,
                           threads);
  meta.runtime_seconds = timer.seconds();

  auto os = open_out(o.out);
  write_csv(os, meta,
            {"depth", "word", "omega_lo", "omega_hi", "x_lo", "x_hi", "measure"}, rows);

  json j;
  j["meta"] = meta_json(meta);
  j["cells"] = n_cells;
  j["total_measure"] = total_measure;      // mass of the listed base slab, <= 1/2
  j["partial_return_sum"] = partial_er;    // sum of i * measure over listed cells
  j["depths"] = depths;
  write_json_file(with_ext(o.out, ".json"), j);
  return kExitOk;
}

// ------------------------------------------------------------- asymptotics

struct AsymptoticsOpts {
  SystemOpts sys;
  int n_max = 1000;
  long samples = 20000;
  std::uint64_t seed = 42;
  std::string out = "asymptotics.csv";
};

int run_asymptotics(const AsymptoticsOpts& o, int threads) {
  const SystemParams p = params_of(o.sys);
  if (o.n_max < 100)
    throw std::domain_error(
        "asymptotics: --n-max must be >= 100; shorter tables cannot support the "
        "power-law fits this command reports");
  if (o.samples < 100) throw std::domain_error("asymptotics: --samples must be >= 100");

  Timer timer;
  // Room above n_max so the tail stopping rule can satisfy k >= 4n at the
  // deepest reported tail point (n_max / 4).
  const int k_max = o.n_max + 16;
  const ExpectationTable table = build_expectation_table(k_max, o.samples, o.seed, p, threads);

  std::vector<std::vector<double>> exp_rows;
  exp_rows.reserve(static_cast<std::size_t>(o.n_max));
  for (int n = 1; n <= o.n_max; ++n)
    exp_rows.push_back({static_cast<double>(n), table.e[static_cast<std::size_t>(n)],
                        table.se[static_cast<std::size_t>(n)],
                        n <= table.exact_upto ? 1.0 : 0.0});

  // Log-spaced tail grid up to n_max / 4.
  std::set<int> tail_ns;
  for (int j = 0;; ++j) {
    const int n = static_cast<int>(std::lround(std::pow(10.0, j / 12.0)));
    if (n > o.n_max / 4) break;
    if (n >= 2) tail_ns.insert(n);
  }
  tail_ns.insert(o.n_max / 4);
  const TailTable tails = tail_Rhat(std::vector<int>(tail_ns.begin(), tail_ns.end()), p, table);

  std::vector<std::vector<double>> tail_rows;
  std::vector<double> tail_series(static_cast<std::size_t>(o.n_max / 4) + 1, 0.0);
  for (const auto& r : tails.rows) {
    tail_rows.push_back({static_cast<double>(r.n), r.value, static_cast<double>(r.k_used),
                         r.converged ? 1.0 : 0.0, r.remainder_bound,
                         r.remainder_small ? 1.0 : 0.0});
    tail_series[static_cast<std::size_t>(r.n)] = r.value;
  }

  json j;
  j["table"] = json{{"k_max", k_max},
                    {"exact_upto", table.exact_upto},
                    {"mc_samples", table.mc_samples}};

  std::vector<double> exp_series(static_cast<std::size_t>(o.n_max) + 1, 0.0);
  std::vector<double> exp_se(static_cast<std::size_t>(o.n_max) + 1, 0.0);
  for (int n = 1; n <= o.n_max; ++n) {
    exp_series[static_cast<std::size_t>(n)] = table.e[static_cast<std::size_t>(n)];
    exp_se[static_cast<std::size_t>(n)] = table.se[static_cast<std::size_t>(n)];
  }
  // The tables are the product; the fits are annotations.  A window that is
  // empty or too sparse for this table size degrades to null + message.
  try {
    j["expectation_fit"] =
        fit_json(fit_power_law(exp_series, exp_se, std::max(50, o.n_max / 20), o.n_max));
  } catch (const std::logic_error& e) {
    j["expectation_fit"] = nullptr;
    j["expectation_fit_error"] = e.what();
  }
  try {
    j["tail_fit"] =
        fit_json(fit_power_law(tail_series, std::max(50, o.n_max / 20), o.n_max / 4));
  } catch (const std::logic_error& e) {
    j["tail_fit"] = nullptr;
    j["tail_fit_error"] = e.what();
  }

  // Expected return time, truncated at the table depth, with the half-depth
  // value as a convergence probe.
  double er_full = 0.0, er_half = 0.0;
  for (int i = 1; i <= table.max_level(); ++i) {
    const double term = i * cell_measure(i, table);
    er_full += term;
    if (i <= table.max_level() / 2) er_half += term;
  }
  j["expected_return_time"] = json{{"value", er_full},
                                   {"value_half_depth", er_half},
                                   {"rel_change", std::abs(er_full - er_half) / er_full}};

  RunMeta meta = make_meta("asymptotics", o.sys,
                           {{"n_max", std::to_string(o.n_max)},
                            {"samples", std::to_string(o.samples)}},
                           true, o.seed, threads);
  meta.runtime_seconds = timer.seconds();

  auto os = open_out(o.out);
  write_csv(os, meta, {"n", "e", "se", "exact"}, exp_rows);
  auto ot = open_out(with_suffix(o.out, "_tail"));
  write_csv(ot, meta, {"n", "tail", "k_used", "converged", "remainder_bound", "remainder_small"},
            tail_rows);
  j["meta"] = meta_json(meta);
  write_json_file(with_ext(o.out, ".json"), j);
  return kExitOk;
}

// ----------------------------------------------------------------- density

struct GridOpts {
  std::string kind = "uniform";
  int bins = 1024;
  double q = 0.0;  // 0 = choose from alpha
};

PartitionGrid grid_of(const GridOpts& g, const SystemParams& p) {
  if (g.kind == "uniform") return uniform_grid(g.bins);
  return geometric_grid(g.bins, g.q > 0.0 ? g.q : geometric_exponent(p));
}

struct DensityOpts {
  SystemOpts sys;
  GridOpts grid;
  std::string map = "annealed";
  double tol = 1e-12;
  long max_iter = 200000;
  std::string out = "density.csv";
};

SparseMat matrix_of(const std::string& which, const SystemParams& p, const PartitionGrid& g) {
  if (which == "annealed") return annealed_matrix(p, g);
  return ulam_matrix(p.map_of(which == "alpha"), g);
}

int run_density(const DensityOpts& o, int threads) {
  const SystemParams p = params_of(o.sys);
  Timer timer;
  const PartitionGrid g = grid_of(o.grid, p);
  const SparseMat M = matrix_of(o.map, p, g);
  const StationaryResult st = stationary_density(M, g, o.tol, o.max_iter);

  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i)
    rows.push_back({g.b[static_cast<std::size_t>(i)], g.b[static_cast<std::size_t>(i) + 1],
                    st.density.v[static_cast<std::size_t>(i)], g.width(i),
                    st.density.mass(i)});

  RunMeta meta = make_meta("density", o.sys,
                           {{"map", o.map},
                            {"grid", o.grid.kind},
                            {"bins", std::to_string(o.grid.bins)},
                            {"q", format_full(o.grid.kind == "geometric"
                                                  ? (o.grid.q > 0.0 ? o.grid.q
                                                                    : geometric_exponent(p))
                                                  : 0.0)},
                            {"tol", format_full(o.tol)},
                            {"max_iter", std::to_string(o.max_iter)}},
                           false, 0, threads);
  meta.runtime_seconds = timer.seconds();

  auto os = open_out(o.out);
  write_csv(os, meta, {"bin_lo", "bin_hi", "f_value", "width", "mass"}, rows);

  double norm = 0.0;
  for (int i = 0; i < g.n; ++i) norm += st.density.mass(i);
  json j;
  j["meta"] = meta_json(meta);
  j["iterations"] = st.iterations;
  j["residual"] = st.residual;
  j["converged"] = st.converged;
  j["normalization"] = norm;
  j["mass_below_1_16"] = st.density.mass_below(1.0 / 16.0);
  j["mass_below_1_8"] = st.density.mass_below(1.0 / 8.0);
  write_json_file(with_ext(o.out, ".json"), j);

  if (!st.converged) {
    std::cerr << "density: power iteration left residual " << st.residual << " after "
              << st.iterations << " steps (target " << o.tol << ")\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

// ------------------------------------------------------------- correlation

struct CorrelationOpts {
  SystemOpts sys;
  GridOpts grid;
  std::string method = "operator";
  std::string phi = "x";
  std::string psi = "x";
  bool allow_nonholder_psi = false;
  int n_max = 100;
  double tol = 1e-12;
  long max_iter = 200000;
  long samples = 50000;
  long burn_in = 10000;
  std::uint64_t seed = 42;
  std::string out = "correlation.csv";
};

int run_correlation(const CorrelationOpts& o, int threads) {
  const SystemParams p = params_of(o.sys);
  const Observable phi = observable_by_name(o.phi);
  const Observable psi = observable_by_name(o.psi);

  Timer timer;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> extra = {
      {"method", o.method}, {"phi", o.phi}, {"psi", o.psi},
      {"n_max", std::to_string(o.n_max)}};

  long iterations = 0;
  if (o.method == "operator") {
    const PartitionGrid g = grid_of(o.grid, p);
    const SparseMat M = annealed_matrix(p, g);
    const StationaryResult st = stationary_density(M, g, o.tol, o.max_iter);
    if (!st.converged) {
      std::cerr << "correlation: stationary density did not converge (residual "
                << st.residual << " after " << st.iterations << " steps)\n";
      return kExitNoConvergence;
    }
    iterations = st.iterations;
    const auto cor =
        correlation_operator(M, st.density, phi, psi, o.n_max, o.allow_nonholder_psi);
    for (int n = 0; n <= o.n_max; ++n)
      rows.push_back({static_cast<double>(n), cor[static_cast<std::size_t>(n)], 0.0});
    extra.emplace_back("grid", o.grid.kind);
    extra.emplace_back("bins", std::to_string(o.grid.bins));
  } else {
    const McSeries mc = correlation_mc(p, phi, psi, o.n_max, o.samples, o.burn_in, o.seed,
                                       threads, o.allow_nonholder_psi);
    for (int n = 0; n <= o.n_max; ++n)
      rows.push_back({static_cast<double>(n), mc.value[static_cast<std::size_t>(n)],
                      mc.se[static_cast<std::size_t>(n)]});
    extra.emplace_back("samples", std::to_string(o.samples));
    extra.emplace_back("burn_in", std::to_string(o.burn_in));
  }

  RunMeta meta = make_meta("correlation", o.sys, std::move(extra), o.method == "mc",
                           o.seed, threads);
  meta.runtime_seconds = timer.seconds();
  if (o.method == "operator") {
    meta.params.emplace_back("stationary_iterations", std::to_string(iterations));
  }
  auto os = open_out(o.out);
  write_csv(os, meta, {"n", "cor", "se"}, rows);
  return kExitOk;
}

// ------------------------------------------------------------------ verify

struct VerifyOpts {
  SystemOpts sys;
  std::string suite;
  int depth = 12;
  long words = 10000;
  int i_max = 8;
  int pairs = 10;
  int grid_points = 2000;
  long hoeffding_n = 2000;
  double p0 = -1.0;  // < 0 = use 0.75 * p1
  std::uint64_t seed = 42;
  std::string out = "verify.json";
};

CheckResult schwarzian_row(const char* name, const SchwarzianReport& r, int grid_points) {
  CheckResult c;
  c.check = name;
  c.params = "gamma=" + format_full(r.gamma);
  c.n_cases = grid_points;
  c.worst_margin = r.has_threshold ? r.threshold_gap : 0.0;
  c.pass = r.sign_pattern_ok;
  if (!c.pass) c.counterexamples.push_back("sign pattern violated on the scan grid");
  return c;
}

int run_verify(const VerifyOpts& o, int threads) {
  const SystemParams p = params_of(o.sys);
  const double p0 = o.p0 < 0.0 ? 0.75 * p.p1 : o.p0;
  if (!(p0 > 0.0 && p0 < p.p1))
    throw std::domain_error("verify: --p0 must lie in (0, p1)");

  Timer timer;
  std::vector<CheckResult> checks;
  json details = json::object();

  auto add_distortion = [&](bool with_contraction) {
    const DistortionReport rep = distortion_scan(p, o.i_max, o.pairs, o.seed);
    CheckResult c;
    c.check = "distortion_scan";
    c.params = "i_max=" + std::to_string(rep.i_max) +
               " pairs=" + std::to_string(rep.pairs.size());
    c.n_cases = static_cast<long>(rep.pairs.size());
    c.worst_margin = rep.c_estimate;
    c.pass = rep.stable && rep.contraction_violations == 0;
    if (rep.contraction_violations > 0)
      c.counterexamples.push_back(std::to_string(rep.contraction_violations) +
                                  " separation contraction violations");
    if (!rep.stable)
      c.counterexamples.push_back("distortion constant unstable: first half " +
                                  format_full(rep.c_first_half) + " vs full " +
                                  format_full(rep.c_estimate));
    checks.push_back(std::move(c));
    if (with_contraction)
      checks.push_back(check_contraction(p, std::min(8, o.i_max), 4, o.seed + 1));
    details["distortion"] = json{{"c_estimate", rep.c_estimate},
                                 {"c_first_half", rep.c_first_half},
                                 {"stable", rep.stable},
                                 {"contraction_violations", rep.contraction_violations},
                                 {"i_max", rep.i_max},
                                 {"pairs", rep.pairs.size()}};
  };

  auto add_schwarzian = [&] {
    const SchwarzianReport ra = schwarzian_scan(p.map_of(true), o.grid_points);
    const SchwarzianReport rb = schwarzian_scan(p.map_of(false), o.grid_points);
    checks.push_back(schwarzian_row("schwarzian_alpha", ra, o.grid_points));
    checks.push_back(schwarzian_row("schwarzian_beta", rb, o.grid_points));
    auto detail = [](const SchwarzianReport& r) {
      return json{{"gamma", r.gamma},
                  {"has_threshold", r.has_threshold},
                  {"threshold_scan", r.threshold_scan},
                  {"threshold_closed", r.threshold_closed},
                  {"threshold_gap", r.threshold_gap}};
    };
    details["schwarzian"] = json::array({detail(ra), detail(rb)});
  };

  if (o.suite == "domination") {
    checks.push_back(check_domination(p.map_of(true), p.map_of(false), 10000));
    checks.push_back(check_monotone_pair(p.map_of(true), p.map_of(false), 200));
  } else if (o.suite == "bounds") {
    checks.push_back(check_rough_bounds(p, o.depth));
    checks.push_back(check_rough_bounds_sampled(p, {16, 32, 64, 128, 256, 512}, o.words,
                                                o.seed));
  } else if (o.suite == "k0") {
    checks.push_back(check_k0(p, o.depth));
  } else if (o.suite == "hoeffding") {
    checks.push_back(check_hoeffding_sweep(o.hoeffding_n, p0, p));
  } else if (o.suite == "distortion") {
    add_distortion(true);
  } else if (o.suite == "schwarzian") {
    add_schwarzian();
  } else {  // all
    SuiteResult suite = lemma_suite(p, o.depth, o.words, o.seed);
    checks = std::move(suite.checks);
    add_distortion(false);  // lemma_suite already ran the contraction check
  }

  bool all_pass = true;
  json rows = json::array();
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    rows.push_back(check_json(c));
  }

  RunMeta meta = make_meta("verify", o.sys,
                           {{"suite", o.suite},
                            {"depth", std::to_string(o.depth)},
                            {"words", std::to_string(o.words)},
                            {"i_max", std::to_string(o.i_max)},
                            {"grid_points", std::to_string(o.grid_points)},
                            {"hoeffding_n", std::to_string(o.hoeffding_n)},
                            {"p0", format_full(p0)}},
                           true, o.seed, threads);
  meta.runtime_seconds = timer.seconds();

  json j;
  j["meta"] = meta_json(meta);
  j["suite"] = o.suite;
  j["pass"] = all_pass;
  j["checks"] = rows;
  if (!details.empty()) j["details"] = details;
  write_json_file(o.out, j);

  for (const auto& c : checks)
    std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.check << "  (" << c.n_cases
              << " cases, worst margin " << format_full(c.worst_margin) << ")\n";
  std::cout << (all_pass ? "all checks passed" : "CHECK FAILURE") << "\n";
  return all_pass ? kExitOk : kExitCheckFailure;
}

void add_grid_flags(CLI::App* cmd, GridOpts& g) {
  cmd->add_option("--grid", g.kind, "bin layout")
      ->check(CLI::IsMember({"uniform", "geometric"}))
      ->capture_default_str();
  cmd->add_option("--bins", g.bins, "number of bins")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  cmd->add_option("--q", g.q,
                  "geometric grid exponent (default: chosen from alpha)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rimlab: random interval map laboratory (orbits, tower structure, transfer "
      "operators, decay rates, verification suites)"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.set_config("--config", "",
                 "flat key=value preset file; command-line flags win on conflict");
  int threads = 1;
  app.add_option("--threads", threads,
                 "worker thread cap; 1 guarantees bit-identical reruns")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.require_subcommand(1);

  int exit_code = kExitOk;

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "iterate the skew product, write the orbit");
  add_system_flags(c_sim, sim.sys);
  c_sim->add_option("--steps", sim.steps, "orbit length")->capture_default_str();
  c_sim->add_option("--x0", sim.x0, "initial fibre point in [0,1]")->capture_default_str();
  auto* om = c_sim->add_option("--omega0", sim.omega0,
                               "initial base point in [0,1); when omitted the base "
                               "itinerary is drawn symbol by symbol instead");
  c_sim->add_option("--seed", sim.seed, "rng seed")->capture_default_str();
  c_sim->add_option("--out", sim.out, "orbit csv path")->capture_default_str();
  c_sim->callback([&] {
    sim.omega_given = om->count() > 0;
    exit_code = run_simulate(sim, threads);
  });

  TowerOpts tow;
  auto* c_tow = app.add_subcommand("tower", "list the return-time partition cells");
  add_system_flags(c_tow, tow.sys);
  c_tow->add_option("--i-max", tow.i_max, "deepest return time listed")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  c_tow->add_option("--out", tow.out, "cell csv path")->capture_default_str();
  c_tow->callback([&] { exit_code = run_tower(tow, threads); });

  AsymptoticsOpts asym;
  auto* c_asym = app.add_subcommand(
      "asymptotics", "expectation decay, return tail table, and power-law fits");
  add_system_flags(c_asym, asym.sys);
  c_asym->add_option("--n-max", asym.n_max, "deepest expectation level (>= 100)")
      ->capture_default_str();
  c_asym->add_option("--samples", asym.samples, "monte carlo chains for deep levels")
      ->capture_default_str();
  c_asym->add_option("--seed", asym.seed, "rng seed")->capture_default_str();
  c_asym->add_option("--out", asym.out, "expectation csv path")->capture_default_str();
  c_asym->callback([&] { exit_code = run_asymptotics(asym, threads); });

  DensityOpts den;
  auto* c_den = app.add_subcommand("density", "stationary density of a transfer matrix");
  add_system_flags(c_den, den.sys);
  add_grid_flags(c_den, den.grid);
  c_den->add_option("--map", den.map, "which operator to discretize")
      ->check(CLI::IsMember({"annealed", "alpha", "beta"}))
      ->capture_default_str();
  c_den->add_option("--tol", den.tol, "power iteration residual target")
      ->capture_default_str();
  c_den->add_option("--max-iter", den.max_iter, "power iteration step cap")
      ->capture_default_str();
  c_den->add_option("--out", den.out, "density csv path")->capture_default_str();
  c_den->callback([&] { exit_code = run_density(den, threads); });

  CorrelationOpts cor;
  auto* c_cor = app.add_subcommand("correlation", "annealed correlation decay series");
  add_system_flags(c_cor, cor.sys);
  add_grid_flags(c_cor, cor.grid);
  c_cor->add_option("--method", cor.method, "operator pushforward or direct monte carlo")
      ->check(CLI::IsMember({"operator", "mc"}))
      ->capture_default_str();
  c_cor->add_option("--phi", cor.phi, "first observable")->capture_default_str();
  c_cor->add_option("--psi", cor.psi, "second observable (must be Holder unless overridden)")
      ->capture_default_str();
  c_cor->add_flag("--allow-nonholder-psi", cor.allow_nonholder_psi,
                  "run anyway with a psi outside the covered regularity class");
  c_cor->add_option("--n-max", cor.n_max, "largest lag")
      ->check(CLI::Range(0, 1 << 20))
      ->capture_default_str();
  c_cor->add_option("--tol", cor.tol, "stationary solve residual target")
      ->capture_default_str();
  c_cor->add_option("--max-iter", cor.max_iter, "stationary solve step cap")
      ->capture_default_str();
  c_cor->add_option("--samples", cor.samples, "mc time windows")->capture_default_str();
  c_cor->add_option("--burn-in", cor.burn_in, "mc steps discarded before sampling")
      ->capture_default_str();
  c_cor->add_option("--seed", cor.seed, "rng seed (mc)")->capture_default_str();
  c_cor->add_option("--out", cor.out, "correlation csv path")->capture_default_str();
  c_cor->callback([&] { exit_code = run_correlation(cor, threads); });

  VerifyOpts ver;
  auto* c_ver = app.add_subcommand("verify", "run a verification suite, write a json ledger");
  add_system_flags(c_ver, ver.sys);
  c_ver->add_option("suite", ver.suite, "which checks to run")
      ->required()
      ->check(CLI::IsMember(
          {"domination", "bounds", "k0", "hoeffding", "distortion", "schwarzian", "all"}));
  c_ver->add_option("--depth", ver.depth, "exhaustive word depth")
      ->check(CLI::Range(2, 20))
      ->capture_default_str();
  c_ver->add_option("--words", ver.words, "sampled words per deep level")
      ->capture_default_str();
  c_ver->add_option("--i-max", ver.i_max, "distortion cell depth")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  c_ver->add_option("--pairs", ver.pairs, "distortion pairs per cell")
      ->capture_default_str();
  c_ver->add_option("--grid-points", ver.grid_points, "schwarzian scan resolution")
      ->capture_default_str();
  c_ver->add_option("--n-max", ver.hoeffding_n, "hoeffding sweep depth")
      ->capture_default_str();
  c_ver->add_option("--p0", ver.p0, "hoeffding threshold (default 0.75 * p1)");
  c_ver->add_option("--seed", ver.seed, "rng seed for sampled checks")
      ->capture_default_str();
  c_ver->add_option("--out", ver.out, "ledger json path")->capture_default_str();
  c_ver->callback([&] { exit_code = run_verify(ver, threads); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    // Anything else from the numerics (a root solve hitting its iteration
    // cap, a table refusing its size) is a non-convergence report.
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
  return exit_code;
}

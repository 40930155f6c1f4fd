#pragma once

// Scenario runner behind the qtransfer command line tool.
//
// Scenarios: harvest (field coefficients and harvested negativity), teleport
// (closed-form and exact-channel teleported negativity), nogo (direct
// transmission checks on finite intermediaries), compare (harvest+teleport
// against direct transmission). Each sweep point is evaluated independently;
// results are written in sweep order whatever the thread count.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qtransfer/app/config.hpp"
#include "qtransfer/app/records.hpp"
#include "qtransfer/field.hpp"
#include "qtransfer/harvest.hpp"
#include "qtransfer/nogo.hpp"
#include "qtransfer/teleport.hpp"

namespace qtransfer::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitConvergence = 3,
  kExitInvariant = 4,
  kExitDimension = 5,
};

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::config: return kExitConfig;
    case Error::Kind::convergence: return kExitConvergence;
    case Error::Kind::invariant: return kExitInvariant;
    case Error::Kind::dimension: return kExitDimension;
  }
  return kExitFailure;
}

struct Settings {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool verbose = false;
  std::ostream* log = nullptr;
};

// ---------------------------------------------------------------------------
// Config -> domain objects

inline FieldModel field_from(const ConfigView& v) {
  FieldModel m;
  m.spatial_dimension = static_cast<int>(v.integer("field", "dimension", 3));
  m.mass = v.num("field", "mass", 0.0);
  m.validate();
  return m;
}

inline DetectorParams detector_from(const ConfigView& v, const std::string& section, int dim, double default_x) {
  DetectorParams d;
  d.label = section;
  d.coupling = v.num(section, "coupling", 0.1);
  d.gap = v.num(section, "gap", 1.0);
  const double xyz[3] = {v.num(section, "x", default_x), v.num(section, "y", 0.0), v.num(section, "z", 0.0)};
  for (int k = dim; k < 3; ++k)
    if (xyz[k] != 0) throw ConfigError(section + ": position component beyond the field dimension is nonzero");
  d.position.assign(xyz, xyz + dim);
  d.switching.center = v.num(section, "switching_center", 0.0);
  d.switching.width = v.num(section, "switching_width", 1.0);
  d.smearing_width = v.num(section, "smearing_width", 0.5);
  d.validate(dim);
  return d;
}

inline QuadratureConfig quadrature_from(const ConfigView& v) {
  QuadratureConfig q;
  q.rel_tol = v.num("quadrature", "rel_tol", q.rel_tol);
  q.abs_tol = v.num("quadrature", "abs_tol", q.abs_tol);
  q.k_max_multiplier = v.num("quadrature", "k_max_multiplier", q.k_max_multiplier);
  q.time_window_multiplier = v.num("quadrature", "time_window_multiplier", q.time_window_multiplier);
  const auto mi = v.integer("quadrature", "max_intervals", static_cast<long long>(q.max_intervals));
  if (mi <= 0) throw ConfigError("quadrature.max_intervals must be positive");
  q.max_intervals = static_cast<std::size_t>(mi);
  q.validate();
  return q;
}

/// Coefficients from [coefficients] when present, otherwise from the field.
inline HarvestResult coefficients_from(const ConfigView& v) {
  if (v.has_section("coefficients")) {
    HarvestResult r;
    auto& c = r.coefficients;
    c.L_AA = v.num("coefficients", "L_AA", 0.0);
    c.L_BB = v.num("coefficients", "L_BB", 0.0);
    c.L_AB = {v.num("coefficients", "L_AB_re", 0.0), v.num("coefficients", "L_AB_im", 0.0)};
    c.M = {v.num("coefficients", "M_re", 0.0), v.num("coefficients", "M_im", 0.0)};
    if (c.L_AA < 0 || c.L_BB < 0) throw ConfigError("coefficients.L_AA and L_BB must be >= 0");
    return r;
  }
  const auto model = field_from(v);
  const auto a = detector_from(v, "detector_A", model.spatial_dimension, 0.0);
  const auto b = detector_from(v, "detector_B", model.spatial_dimension, 4.0);
  return harvest_coefficients(model, a, b, quadrature_from(v));
}

struct InputSpec {
  double p = 0.5;
  PureState state;
  PureState phi_g, phi_e;
};

/// [input] p = Schmidt weight, or amplitudes (+ amplitudes_im) over gg, ge, eg, ee.
inline InputSpec input_from(const ConfigView& v) {
  InputSpec in;
  if (v.has("input", "amplitudes")) {
    if (v.has("input", "p")) throw ConfigError("input: give either p or amplitudes, not both");
    const auto re = v.list("input", "amplitudes");
    auto im = v.list("input", "amplitudes_im");
    if (im.empty()) im.assign(re.size(), 0.0);
    if (re.size() != 4 || im.size() != 4) throw ConfigError("input.amplitudes needs 4 entries (gg, ge, eg, ee)");
    Vector a(4);
    for (int i = 0; i < 4; ++i) a(i) = cplx(re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(i)]);
    if (a.norm() == 0) throw ConfigError("input.amplitudes must not all vanish");
    in.state = PureState::normalized(a, Dims{2, 2});
    const auto aligned = align_bell_basis(in.state);
    in.p = aligned.p;
    in.phi_g = aligned.phi_g;
    in.phi_e = aligned.phi_e;
  } else {
    in.p = v.num("input", "p", 0.5);
    if (!(in.p >= 0 && in.p <= 1)) throw ConfigError("input.p must lie in [0, 1]");
    in.state = schmidt_input(in.p);
    in.phi_g = PureState::basis(2, 0);
    in.phi_e = PureState::basis(2, 1);
  }
  return in;
}

inline CorrectionStrategy strategy_from(const ConfigView& v, const HarvestCoefficients& c) {
  const auto name = v.str("teleport", "strategy", "phase_corrected");
  if (name == "standard") return CorrectionStrategy::standard();
  if (name == "phase_corrected") return CorrectionStrategy::phase_corrected(v.num("teleport", "phi", c.phi()));
  throw ConfigError("teleport.strategy must be 'standard' or 'phase_corrected', got '" + name + "'");
}

inline ToyTransmissionModel nogo_model_from(const ConfigView& v, std::uint64_t seed, std::size_t index) {
  const auto kind = v.str("nogo", "model", "default");
  ToyTransmissionModel m;
  if (kind == "default") {
    const auto fd = v.integer("nogo", "field_dim", 10);
    if (fd < 2 || fd > 16) throw ConfigError("nogo.field_dim must lie in [2, 16]");
    m = default_toy_model(v.num("nogo", "p", 0.5), static_cast<std::size_t>(fd));
  } else if (kind == "random") {
    RandomModelOptions opt;
    const auto maxd = v.integer("nogo", "max_field_dim", 5);
    if (maxd < 2 || maxd > 10) throw ConfigError("nogo.max_field_dim must lie in [2, 10]");
    opt.max_field_dim = static_cast<std::size_t>(maxd);
    if (v.flag("nogo", "qudit", false)) opt.ancilla_dim = opt.a_dim = 3;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    m = random_toy_model(rng, opt);
  } else {
    throw ConfigError("nogo.model must be 'default' or 'random', got '" + kind + "'");
  }
  m.lambda_A = v.num("nogo", "lambda_A", m.lambda_A);
  m.lambda_B = v.num("nogo", "lambda_B", m.lambda_B);
  if (!v.flag("nogo", "couple_A", true)) m.couplings_A.clear();
  if (!v.flag("nogo", "couple_B", true)) m.couplings_B.clear();
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Scenarios

inline void add_coefficients(Record& r, const HarvestResult& h) {
  const auto& c = h.coefficients;
  r.set("L_AA", c.L_AA).set("L_BB", c.L_BB);
  r.set("L_AB_re", c.L_AB.real()).set("L_AB_im", c.L_AB.imag());
  r.set("M_re", c.M.real()).set("M_im", c.M.imag()).set("phi", c.phi());
}

inline void add_errors(Record& r, const HarvestResult& h) {
  r.set("err_L_AA", h.err_L_AA).set("err_L_BB", h.err_L_BB).set("err_L_AB", h.err_L_AB).set("err_M", h.err_M);
}

inline void check_coefficients(const HarvestCoefficients& c) {
  c.validate();
  if (!c.satisfies_cauchy_schwarz()) throw InvariantError("|L_AB|^2 exceeds L_AA L_BB");
}

inline std::vector<Record> harvest_point(const ConfigView& v, Record base) {
  const auto h = coefficients_from(v);
  check_coefficients(h.coefficients);
  add_coefficients(base, h);
  base.set("negativity_harvested", harvested_negativity_2nd(h.coefficients));
  base.set("outside_perturbative_regime", h.coefficients.outside_perturbative_regime());
  add_errors(base, h);
  return {base};
}

inline std::vector<Record> teleport_point(const ConfigView& v, Record base) {
  const auto h = coefficients_from(v);
  const auto& c = h.coefficients;
  check_coefficients(c);
  const auto in = input_from(v);
  const auto strategy = strategy_from(v, c);
  base.set("p", in.p).set("strategy", strategy.name());
  add_coefficients(base, h);
  base.set("negativity_harvested", harvested_negativity_2nd(c));
  base.set("negativity_teleported", teleported_negativity_2nd(in.p, c, strategy));
  if (v.flag("teleport", "exact_channel", true)) {
    const auto resource = psd_repair(resource_state(c));
    const auto res = teleport_channel(in.state, resource, in.phi_g, in.phi_e, strategy);
    base.set("negativity_exact_channel", negativity(res.xi, 0));
  }
  add_errors(base, h);
  return {base};
}

struct DirectVerdict {
  double first_order = 0;
  double ha_difference = 0;
  double min_second_order_shift = 0;
  bool zero = true;
};

/// Second-order direct-transmission checks on one finite intermediary.
inline DirectVerdict direct_transmission(const ToyTransmissionModel& m, double tol = 1e-8) {
  const auto grid = default_grid(m);
  DirectVerdict d;
  d.first_order = check_first_order(m, grid).max_abs;
  const auto with = dyson_reduced_terms(m, grid, true);
  const auto x_with = second_order_operator(m, grid, true);
  const auto x_without = second_order_operator(m, grid, false);
  d.ha_difference = max_abs(x_with.matrix() - x_without.matrix());
  const auto corr = zero_eig_corrections(
      {partial_transpose(with.rho0, 0), partial_transpose(with.rho1, 0), partial_transpose(with.rho2, 0)}, 0.0);
  d.min_second_order_shift = corr.second_order.empty()
                                 ? 0.0
                                 : *std::min_element(corr.second_order.begin(), corr.second_order.end());
  d.zero = d.first_order <= tol && d.ha_difference <= tol && d.min_second_order_shift >= -tol;
  return d;
}

inline std::vector<Record> compare_point(const ConfigView& v, const Settings& s, Record base) {
  const auto h = coefficients_from(v);
  const auto& c = h.coefficients;
  check_coefficients(c);
  const auto in = input_from(v);
  const auto strategy = strategy_from(v, c);
  base.set("p", in.p).set("strategy", strategy.name());
  add_coefficients(base, h);
  base.set("negativity_harvested", harvested_negativity_2nd(c));
  base.set("negativity_teleported", teleported_negativity_2nd(in.p, c, strategy));
  const auto d = direct_transmission(nogo_model_from(v, s.seed, 0));
  base.set("direct_transmission", std::string(d.zero ? "second-order zero" : "second-order nonzero"));
  base.set("direct_first_order", d.first_order);
  base.set("direct_ha_difference", d.ha_difference);
  add_errors(base, h);
  return {base};
}

inline std::vector<Record> nogo_point(const ConfigView& v, const Settings& s, const Record& base) {
  auto lambdas = v.list("nogo", "lambdas");
  if (lambdas.empty()) lambdas = {0.01, 0.02, 0.04, 0.07, 0.1};
  const auto count = v.integer("nogo", "count", 1);
  if (count < 1) throw ConfigError("nogo.count must be positive");
  std::vector<Record> rows;
  for (long long k = 0; k < count; ++k) {
    const auto m = nogo_model_from(v, s.seed, static_cast<std::size_t>(k));
    const auto grid = default_grid(m);
    const auto fo = check_first_order(m, grid);
    const auto d = direct_transmission(m);
    const auto scaling = negativity_scaling(m, lambdas, grid);
    const auto quad = dyson_reduced_terms(m, grid).quadrature_error;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      Record r = base;
      r.set("model", static_cast<std::int64_t>(k)).set("lambda", lambdas[i]);
      r.set("negativity", scaling.negativities[i]).set("min_pt_eigenvalue", scaling.min_pt_eigenvalues[i]);
      r.set("first_order_max_abs", fo.max_abs).set("first_order_vacuous", fo.vacuous);
      r.set("ha_difference", d.ha_difference).set("min_second_order_shift", d.min_second_order_shift);
      r.set("quadratic_coefficient", scaling.quadratic_coefficient.value_or(std::numeric_limits<double>::quiet_NaN()));
      r.set("exponent", scaling.exponent.value_or(std::numeric_limits<double>::quiet_NaN()));
      r.set("quadrature_error", quad);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

inline std::string scenario_of(const ConfigMap& cfg) {
  const auto s = ConfigView(cfg).required("run", "scenario");
  if (s != "harvest" && s != "teleport" && s != "nogo" && s != "compare")
    throw ConfigError("run.scenario must be harvest, teleport, nogo or compare, got '" + s + "'");
  return s;
}

/// Evaluates every sweep point; rows come back in sweep order.
inline std::vector<Record> run_scenario(const ConfigMap& cfg, const Settings& s) {
  const auto scenario = scenario_of(cfg);
  const auto axes = sweep_axes(cfg);
  const auto points = expand_sweep(cfg);

  std::vector<std::vector<Record>> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto work = [&]() {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        const ConfigView v(points[i].config);
        Record base;
        for (std::size_t a = 0; a < axes.size(); ++a) base.set(axes[a].name(), points[i].values[a]);
        if (scenario == "harvest")
          results[i] = harvest_point(v, base);
        else if (scenario == "teleport")
          results[i] = teleport_point(v, base);
        else if (scenario == "compare")
          results[i] = compare_point(v, s, base);
        else
          results[i] = nogo_point(v, s, base);
        if (s.verbose && s.log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *s.log << "qtransfer: point " << (i + 1) << "/" << points.size() << " done\n";
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(s.threads, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // report the first failure in sweep order
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Record> rows;
  for (auto& r : results)
    for (auto& row : r) rows.push_back(std::move(row));
  return rows;
}

// ---------------------------------------------------------------------------
// Entry point

struct RunOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool verbose = false;
  std::ostream* log = &std::cerr;
};

inline std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

inline unsigned parse_threads(const std::string& text, const std::string& where) {
  const double t = ConfigView::parse_double(text, where);
  if (t < 1 || t > 1024 || t != std::floor(t)) throw ConfigError(where + ": thread count must be in 1..1024");
  return static_cast<unsigned>(t);
}

/// Loads the config, runs the scenario, writes <dir>/<csv> and <dir>/<jsonl>.
/// Precedence for the output dir and thread count: flag, then environment
/// (QTRANSFER_OUT, QTRANSFER_THREADS), then config, then defaults.
inline int run(const RunOptions& opt) {
  std::ostream& log = opt.log ? *opt.log : std::cerr;
  try {
    const auto cfg = load_config(opt.config_path);
    const ConfigView v(cfg);
    const auto scenario = scenario_of(cfg);

    Settings s;
    s.verbose = opt.verbose;
    s.log = &log;
    if (opt.seed) {
      s.seed = *opt.seed;
    } else {
      const auto seed = v.integer("run", "seed", 0);
      if (seed < 0) throw ConfigError("run.seed must be non-negative");
      s.seed = static_cast<std::uint64_t>(seed);
    }
    if (opt.threads) {
      if (*opt.threads < 1) throw ConfigError("--threads must be at least 1");
      s.threads = *opt.threads;
    } else if (const auto e = env("QTRANSFER_THREADS")) {
      s.threads = parse_threads(*e, "QTRANSFER_THREADS");
    } else if (v.has("run", "threads")) {
      s.threads = parse_threads(v.str("run", "threads", "1"), "run.threads");
    } else {
      s.threads = std::max(1u, std::thread::hardware_concurrency());
    }

    std::string dir = v.str("output", "dir", ".");
    if (opt.out_dir)
      dir = *opt.out_dir;
    else if (const auto e = env("QTRANSFER_OUT"))
      dir = *e;

    const auto rows = run_scenario(cfg, s);

    std::filesystem::create_directories(dir);
    const auto csv_path = std::filesystem::path(dir) / v.str("output", "csv", scenario + ".csv");
    const auto jsonl_path = std::filesystem::path(dir) / v.str("output", "jsonl", scenario + ".jsonl");
    {
      std::ofstream csv(csv_path, std::ios::binary);
      if (!csv) throw ConfigError("cannot write " + csv_path.string());
      write_csv(csv, rows);
    }
    {
      std::ofstream jsonl(jsonl_path, std::ios::binary);
      if (!jsonl) throw ConfigError("cannot write " + jsonl_path.string());
      write_jsonl(jsonl, rows);
    }
    if (opt.verbose)
      log << "qtransfer: " << rows.size() << " rows -> " << csv_path.string() << ", " << jsonl_path.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "qtransfer: error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    log << "qtransfer: error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "qtransfer: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace qtransfer::app

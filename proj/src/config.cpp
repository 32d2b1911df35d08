#include "dk/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dk/error.hpp"

namespace dk {
namespace {

const std::vector<ConfigKey> kRegistry = {
    {"experiment", "", "heat-oracle|steady-state|ito-strat|contraction|energy|entropy|kinetic-decay|residual|galerkin-cross",
     "experiment to run"},
    {"seed", "1", "uint", "master seed of the Brownian streams"},
    {"ensemble.size", "1", "int", "ensemble members"},
    {"ensemble.workers", "0", "int", "worker threads (0: hardware concurrency)"},

    {"domain.extent", "1", "real", "interval length"},
    {"domain.n_cells", "128", "int", "cells on the interval"},

    {"coeffs.m", "1", "real", "exponent of Phi(xi) = xi^m"},
    {"coeffs.sigma", "sqrt", "sqrt|phi_sqrt|zero", "noise coefficient sigma"},
    {"coeffs.nu", "0", "real", "slope of the drift nu(xi) = nu xi"},
    {"coeffs.smoothing_n", "0", "int", "smoothing level n of sigma_n (0: none)"},

    {"noise.K", "0", "int", "noise modes"},
    {"noise.p", "2", "real", "mode amplitude decay a_k = scale k^-p"},
    {"noise.scale", "1", "real", "mode amplitude scale"},

    {"solver.scheme", "ito_euler", "ito_euler|stratonovich_heun|galerkin_spectral", "time stepper"},
    {"solver.alpha", "0", "real", "added viscosity"},
    {"solver.dt", "0", "real", "fixed time step (0: stability-limited)"},
    {"solver.cfl_theta", "0.5", "real", "fraction of the stability limit"},
    {"solver.dt_max", "0.01", "real", "upper bound on the time step"},
    {"solver.positivity", "clip", "clip|reject_step", "negative-value handling"},
    {"solver.T", "1", "real", "final time"},
    {"solver.boundary", "dirichlet", "dirichlet|periodic", "boundary mode"},
    {"solver.fbar_left", "0", "real", "Dirichlet datum Phi(rho) at x = 0"},
    {"solver.fbar_right", "0", "real", "Dirichlet datum Phi(rho) at x = L"},
    {"solver.galerkin_modes", "0", "int", "spectral modes (0: largest admissible)"},
    {"solver.max_bisections", "6", "int", "reject_step bisection depth"},

    {"initial.kind", "sine", "constant|sine|linear|hole", "initial profile family"},
    {"initial.level", "1", "real", "profile level"},
    {"initial.offset", "0", "real", "profile offset"},
    {"initial.amplitude", "1", "real", "profile amplitude"},
    {"initial.wavenumber", "1", "real", "sine wavenumber"},
    {"initial.center", "0.5", "real", "hole centre"},
    {"initial.radius", "0.15", "real", "hole radius"},
    {"initial.width", "0.15", "real", "hole edge width"},
    {"initial_b.kind", "sine", "constant|sine|linear|hole", "second profile family"},
    {"initial_b.level", "1", "real", "second profile level"},
    {"initial_b.offset", "0", "real", "second profile offset"},
    {"initial_b.amplitude", "1", "real", "second profile amplitude"},
    {"initial_b.wavenumber", "2", "real", "second profile wavenumber"},
    {"initial_b.center", "0.5", "real", "second hole centre"},
    {"initial_b.radius", "0.15", "real", "second hole radius"},
    {"initial_b.width", "0.15", "real", "second hole edge width"},

    {"output.dir", "out", "string", "output directory"},
    {"output.snapshot_every", "0", "real", "time between snapshots (0: T/10)"},
    {"output.profiles", "true", "bool", "store density profiles in snapshots"},

    {"check.tolerance", "1e-3", "real", "error tolerance"},
    {"check.c_max", "10", "real", "bound on fitted estimate constants"},
    {"check.threshold", "0.02", "real", "relative contraction excess threshold"},
    {"check.max_fraction", "0.05", "real", "tolerated fraction of excess members"},
    {"check.abs_tol", "1e-12", "real", "absolute threshold for identical data"},
    {"check.spread", "0.2", "real", "tolerated relative spread across the sweep"},
    {"check.ratio_lo", "1.5", "real", "lower end of the accepted ratio band"},
    {"check.ratio_hi", "3.5", "real", "upper end of the accepted ratio band"},
    {"check.clip_fraction", "1e-3", "real", "tolerated clipped mass over initial mass"},
    {"check.decay_factor", "0.5", "real", "required decay of the dyadic series"},
    {"check.drift", "1e-12", "real", "tolerated relative mass drift"},
    {"check.stderr_multiple", "3", "real", "standard errors allowed around zero"},
    {"check.refine", "true", "bool", "repeat the study on the refined grid"},

    {"sweep.alphas", "0.1,0.01,0.001", "reals", "viscosities of the energy sweep"},
    {"sweep.dt_levels", "3", "int", "time-step halvings of the scheme comparison"},
    {"sweep.dt", "0", "real", "coarsest time step (0: stability-limited)"},

    {"kinetic.dyadic_levels", "8", "int", "dyadic velocity bands below 1"},
    {"kinetic.unit_levels", "8", "int", "unit velocity bands"},
    {"kinetic.windows", "1", "int", "time windows"},
    {"kinetic.touching_ensemble", "0", "int", "members of the touching-zero ensemble (0: ensemble.size)"},

    {"estimate.k", "2.5", "real", "exponent of the L1_t L^k_x estimate"},
    {"estimate.epsilon", "1", "real", "split parameter of the L1_t L^k_x estimate"},
    {"estimate.band_M1", "0.5", "real", "lower level of the band energy"},
    {"estimate.band_M2", "2", "real", "upper level of the band energy"},

    {"residual.cx", "0.45", "real", "test function centre in x"},
    {"residual.rx", "0.3", "real", "test function radius in x"},
    {"residual.cxi", "1", "real", "test function centre in xi"},
    {"residual.rxi", "0.6", "real", "test function radius in xi"},

    {"harmonic.n_cells", "128", "int", "cells per axis of the planar harmonic check"},
    {"conservation.steps", "10000", "int", "periodic steps of the conservation check"},
};

const ConfigKey* find_key(const std::string& key) {
  for (const auto& k : kRegistry)
    if (k.key == key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x)) throw ConfigError(key, "expected a number, got '" + v + "'");
  return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

void check_value(const ConfigKey& k, const std::string& v) {
  if (k.type == "real") {
    parse_real(k.key, v);
  } else if (k.type == "int") {
    const long long x = parse_integer(k.key, v);
    if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(k.key, "integer out of range");
  } else if (k.type == "uint") {
    if (!v.empty() && v[0] == '-') throw ConfigError(k.key, "expected a non-negative integer");
    try {
      std::size_t pos = 0;
      std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(k.key, "expected a non-negative integer, got '" + v + "'");
    }
  } else if (k.type == "bool") {
    parse_bool(k.key, v);
  } else if (k.type == "reals") {
    parse_reals(k.key, v);
  } else if (k.type != "string") {
    std::stringstream ss(k.type);
    std::string option;
    while (std::getline(ss, option, '|'))
      if (option == v) return;
    throw ConfigError(k.key, "expected one of " + k.type + ", got '" + v + "'");
  }
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

ScalarFn ProfileSpec::build(double L) const {
  const ProfileSpec p = *this;
  if (p.kind == "constant") return [p](double) { return p.level; };
  if (p.kind == "sine")
    return [p, L](double x) { return p.offset + p.amplitude * std::sin(p.wavenumber * std::numbers::pi * x / L); };
  if (p.kind == "linear") return [p, L](double x) { return p.offset + p.amplitude * x / L; };
  if (p.kind == "hole")
    return [p](double x) {
      const double s = (std::abs(x - p.center) - p.radius) / p.width;
      return p.offset + p.level * std::clamp(s, 0.0, 1.0);
    };
  throw InvalidArgument("unknown profile kind '" + p.kind + "'");
}

double RunConfig::real(const std::string& key) const { return parse_real(key, text(key)); }

int RunConfig::integer(const std::string& key) const {
  return static_cast<int>(parse_integer(key, text(key)));
}

bool RunConfig::flag(const std::string& key) const { return parse_bool(key, text(key)); }

std::vector<double> RunConfig::reals(const std::string& key) const {
  return parse_reals(key, text(key));
}

const std::string& RunConfig::text(const std::string& key) const {
  const auto it = flat.find(key);
  if (it == flat.end()) throw ConfigError(key, "not a registered key");
  return it->second;
}

const std::vector<ConfigKey>& config_registry() { return kRegistry; }

std::map<std::string, std::string> experiment_defaults(const std::string& experiment) {
  if (experiment == "heat-oracle")
    return {{"domain.n_cells", "256"}, {"coeffs.sigma", "zero"}, {"solver.T", "0.1"},
            {"solver.dt", "3.814697265625e-06"}, {"initial.kind", "sine"}, {"check.tolerance", "1e-3"}};
  if (experiment == "steady-state")
    return {{"domain.n_cells", "256"}, {"coeffs.m", "2"}, {"solver.T", "5"},
            {"solver.fbar_left", "1"}, {"solver.fbar_right", "4"}, {"initial.kind", "linear"},
            {"initial.offset", "1"}, {"initial.amplitude", "1"}, {"check.tolerance", "5e-3"},
            {"harmonic.n_cells", "128"}};
  if (experiment == "contraction")
    return {{"ensemble.size", "50"}, {"coeffs.m", "1"}, {"coeffs.smoothing_n", "4"},
            {"noise.K", "4"}, {"noise.p", "2"}, {"solver.T", "0.5"},
            {"solver.fbar_left", "1"}, {"solver.fbar_right", "1"},
            {"initial.offset", "1"}, {"initial.amplitude", "0.5"}, {"initial.wavenumber", "1"},
            {"initial_b.offset", "1"}, {"initial_b.amplitude", "0.3"}, {"initial_b.wavenumber", "2"},
            {"output.snapshot_every", "0.01"}};
  if (experiment == "ito-strat")
    return {{"ensemble.size", "100"}, {"coeffs.m", "1"}, {"coeffs.smoothing_n", "4"},
            {"noise.K", "4"}, {"noise.p", "2"}, {"solver.T", "0.1"},
            {"solver.fbar_left", "1"}, {"solver.fbar_right", "1"},
            {"initial.offset", "1"}, {"initial.amplitude", "0.5"}, {"check.ratio_lo", "1.5"},
            {"check.ratio_hi", "3.5"}};
  if (experiment == "energy")
    return {{"ensemble.size", "20"}, {"domain.n_cells", "64"}, {"coeffs.m", "2"},
            {"coeffs.smoothing_n", "4"}, {"noise.K", "4"}, {"noise.scale", "0.5"},
            {"solver.T", "1"}, {"solver.fbar_left", "1"}, {"solver.fbar_right", "1"},
            {"initial.offset", "1"}, {"initial.amplitude", "1"}, {"output.snapshot_every", "0.05"}};
  if (experiment == "entropy")
    return {{"ensemble.size", "20"}, {"domain.n_cells", "64"}, {"coeffs.m", "2"},
            {"coeffs.smoothing_n", "4"}, {"noise.K", "4"}, {"noise.scale", "0.5"},
            {"solver.alpha", "0.01"}, {"solver.T", "1"}, {"solver.fbar_left", "1"},
            {"solver.fbar_right", "1"}, {"initial.offset", "1"}, {"initial.amplitude", "1"},
            {"output.snapshot_every", "0.05"}};
  if (experiment == "kinetic-decay")
    return {{"ensemble.size", "20"}, {"coeffs.m", "2"}, {"coeffs.smoothing_n", "4"},
            {"noise.K", "4"}, {"noise.scale", "0.5"}, {"solver.T", "0.5"},
            {"solver.fbar_left", "1"}, {"solver.fbar_right", "1"},
            {"initial.kind", "sine"}, {"initial.offset", "1.5"}, {"initial.amplitude", "0.5"},
            {"initial_b.kind", "hole"}, {"initial_b.level", "1"}, {"solver.positivity", "reject_step"}};
  if (experiment == "residual")
    return {{"ensemble.size", "100"}, {"domain.n_cells", "32"}, {"coeffs.m", "2"},
            {"coeffs.smoothing_n", "4"}, {"noise.K", "2"}, {"noise.scale", "0.5"},
            {"solver.alpha", "0.01"}, {"solver.T", "0.05"}, {"solver.fbar_left", "1"},
            {"solver.fbar_right", "1"}, {"initial.offset", "1"}, {"initial.amplitude", "0.5"},
            {"check.ratio_lo", "1.2"}, {"check.ratio_hi", "2.8"}};
  if (experiment == "galerkin-cross")
    return {{"domain.n_cells", "128"}, {"coeffs.m", "2"}, {"solver.T", "0.1"},
            {"solver.fbar_left", "1"}, {"solver.fbar_right", "1"}, {"solver.galerkin_modes", "127"},
            {"initial.offset", "1"}, {"initial.amplitude", "0.5"}, {"check.tolerance", "5e-3"},
            {"noise.K", "4"}, {"noise.scale", "0.5"}};
  return {};
}

std::map<std::string, std::string> read_config(std::istream& in, const std::string& source) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source, e.message() + " at line " + std::to_string(e.line()));
  }
  std::map<std::string, std::string> out;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      out[name] = trim(node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError(name + "." + key, "nested sections are not supported");
      out[name + "." + key] = trim(leaf.data());
    }
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  return read_config(in, path);
}

RunConfig resolve_config(const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const ConfigKey* k = find_key(key);
    if (!k) throw ConfigError(key, "unknown key");
    check_value(*k, value);
  }
  const auto exp = values.find("experiment");
  if (exp == values.end() || exp->second.empty()) throw ConfigError("experiment", "missing");

  RunConfig c;
  for (const auto& k : kRegistry) c.flat[k.key] = k.fallback;
  for (const auto& [key, value] : experiment_defaults(exp->second)) c.flat[key] = value;
  for (const auto& [key, value] : values) c.flat[key] = value;

  c.experiment = c.text("experiment");
  c.seed = std::stoull(c.text("seed"));
  c.ensemble_size = c.integer("ensemble.size");
  c.workers = c.integer("ensemble.workers");
  require(c.ensemble_size >= 1, "ensemble.size", "must be at least 1");
  require(c.workers >= 0, "ensemble.workers", "must be non-negative");

  c.domain.dimension = 1;
  c.domain.extent = {c.real("domain.extent"), 1.0};
  c.domain.n_cells = {c.integer("domain.n_cells"), 1};
  require(c.domain.extent[0] > 0.0, "domain.extent", "must be positive");
  require(c.domain.n_cells[0] >= 8, "domain.n_cells", "must be at least 8");

  c.m = c.real("coeffs.m");
  require(c.m > 0.0, "coeffs.m", "must be positive");
  const std::string sigma = c.text("coeffs.sigma");
  c.sigma = sigma == "sqrt" ? SigmaKind::sqrt : sigma == "phi_sqrt" ? SigmaKind::phi_sqrt : SigmaKind::zero;
  c.nu_c = c.real("coeffs.nu");
  c.smoothing_n = c.integer("coeffs.smoothing_n");
  require(c.smoothing_n >= 0, "coeffs.smoothing_n", "must be non-negative");

  c.K = c.integer("noise.K");
  c.decay_p = c.real("noise.p");
  c.noise_scale = c.real("noise.scale");
  require(c.K >= 0, "noise.K", "must be non-negative");
  require(c.decay_p >= 0.0, "noise.p", "must be non-negative");

  auto& s = c.solver;
  const std::string scheme = c.text("solver.scheme");
  s.scheme = scheme == "ito_euler"           ? Scheme::ito_euler
             : scheme == "stratonovich_heun" ? Scheme::stratonovich_heun
                                             : Scheme::galerkin_spectral;
  s.alpha = c.real("solver.alpha");
  require(s.alpha >= 0.0, "solver.alpha", "must be non-negative");
  const double dt = c.real("solver.dt");
  require(dt >= 0.0, "solver.dt", "must be non-negative");
  if (dt > 0.0) s.dt = dt;
  s.cfl_theta = c.real("solver.cfl_theta");
  require(s.cfl_theta > 0.0 && s.cfl_theta <= 1.0, "solver.cfl_theta", "must lie in (0, 1]");
  s.dt_max = c.real("solver.dt_max");
  require(s.dt_max > 0.0, "solver.dt_max", "must be positive");
  s.positivity = c.text("solver.positivity") == "clip" ? Positivity::clip : Positivity::reject_step;
  s.T = c.real("solver.T");
  require(s.T > 0.0, "solver.T", "must be positive");
  s.boundary = c.text("solver.boundary") == "periodic" ? BoundaryMode::periodic : BoundaryMode::dirichlet;
  s.fbar = {c.real("solver.fbar_left"), c.real("solver.fbar_right")};
  require(s.fbar.left >= 0.0, "solver.fbar_left", "must be non-negative");
  require(s.fbar.right >= 0.0, "solver.fbar_right", "must be non-negative");
  s.galerkin_modes = c.integer("solver.galerkin_modes");
  require(s.galerkin_modes >= 0, "solver.galerkin_modes", "must be non-negative");
  s.max_bisections = c.integer("solver.max_bisections");
  require(s.max_bisections >= 0, "solver.max_bisections", "must be non-negative");

  for (auto [prefix, profile] : {std::pair{"initial", &c.initial}, std::pair{"initial_b", &c.initial_b}}) {
    const std::string p = prefix;
    profile->kind = c.text(p + ".kind");
    profile->level = c.real(p + ".level");
    profile->offset = c.real(p + ".offset");
    profile->amplitude = c.real(p + ".amplitude");
    profile->wavenumber = c.real(p + ".wavenumber");
    profile->center = c.real(p + ".center");
    profile->radius = c.real(p + ".radius");
    profile->width = c.real(p + ".width");
    require(profile->width > 0.0, p + ".width", "must be positive");
  }

  c.output_dir = c.text("output.dir");
  require(!c.output_dir.empty(), "output.dir", "must not be empty");
  c.snapshot_every = c.real("output.snapshot_every");
  require(c.snapshot_every >= 0.0, "output.snapshot_every", "must be non-negative");
  if (c.snapshot_every == 0.0) c.snapshot_every = s.T / 10.0;
  c.write_profiles = c.flag("output.profiles");

  require(c.reals("sweep.alphas").size() >= 1, "sweep.alphas", "must not be empty");
  for (double a : c.reals("sweep.alphas")) require(a >= 0.0, "sweep.alphas", "must be non-negative");
  require(c.integer("sweep.dt_levels") >= 2, "sweep.dt_levels", "must be at least 2");
  require(c.integer("kinetic.dyadic_levels") >= 1, "kinetic.dyadic_levels", "must be positive");
  require(c.integer("kinetic.unit_levels") >= 1, "kinetic.unit_levels", "must be positive");
  require(c.integer("kinetic.windows") >= 1, "kinetic.windows", "must be positive");
  require(c.real("residual.rx") > 0.0, "residual.rx", "must be positive");
  require(c.real("residual.rxi") > 0.0, "residual.rxi", "must be positive");
  require(c.integer("harmonic.n_cells") >= 8, "harmonic.n_cells", "must be at least 8");
  require(c.integer("conservation.steps") >= 1, "conservation.steps", "must be positive");
  require(c.real("estimate.epsilon") > 0.0, "estimate.epsilon", "must be positive");

  // Module-level validation before any stepping.
  try {
    const Problem p = make_problem(c);
    const Integrator integrator(p);
    if (s.galerkin_modes > 0) {
      Problem spectral = p;
      spectral.cfg.scheme = Scheme::galerkin_spectral;
      const Integrator check(spectral);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("experiment", std::string("invalid setup: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) { return resolve_config(read_config_file(path)); }

Problem make_problem(const RunConfig& cfg) { return make_problem(cfg, cfg.domain.n_cells[0]); }

Problem make_problem(const RunConfig& cfg, int n_cells) {
  DomainSpec spec = cfg.domain;
  spec.n_cells = {n_cells, 1};
  Grid grid = build_grid(spec);
  CoefficientSet coeffs = make_model_case(cfg.m, cfg.sigma, cfg.nu_c);
  if (cfg.smoothing_n > 0) coeffs = smooth_sigma(coeffs, cfg.smoothing_n);
  NoiseModel noise = make_sine_modes(grid, cfg.K, cfg.decay_p, cfg.noise_scale);
  return Problem{std::move(grid), std::move(coeffs), std::move(noise), cfg.solver};
}

}  // namespace dk

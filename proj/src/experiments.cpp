#include "dk/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dk/error.hpp"
#include "dk/harmonic.hpp"

namespace dk {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t workers_of(const RunConfig& cfg) {
  return cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers) : default_workers();
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

double max_error(std::span<const double> rho, std::span<const double> x, const ScalarFn& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) e = std::max(e, std::abs(rho[i] - exact(x[i])));
  return e;
}

void require_finite(const FieldState& s, const std::string& what) {
  for (double r : s.rho)
    if (!std::isfinite(r)) throw NumericalError(what + ": non-finite density", s.step_index);
}

json snapshot_record(const std::string& label, std::uint32_t member, const Snapshot& s,
                     bool profiles) {
  json r = {{"run", label}, {"member", member}, {"t", s.t}, {"step", s.step},
            {"mass", s.mass}, {"min", s.min_rho}, {"clip", s.clip_ledger},
            {"inflow", s.boundary_inflow}};
  if (profiles && !s.rho.empty()) r["rho"] = s.rho;
  return r;
}

void add_trajectory(ExperimentOutput& out, const std::string& label, std::uint32_t member,
                    const Trajectory& traj, bool profiles) {
  for (const auto& s : traj.snapshots) out.snapshots.push_back(snapshot_record(label, member, s, profiles));
}

json to_json(const NamedValues& v) {
  json j = json::object();
  for (const auto& [k, x] : v) j[k] = x;
  return j;
}

json to_json(const EstimateReport& r) {
  return {{"type", "estimate"}, {"name", r.name}, {"lhs", r.lhs}, {"lhs_stderr", r.lhs_stderr},
          {"lhs_terms", to_json(r.lhs_terms)}, {"rhs_terms", to_json(r.rhs_terms)},
          {"rhs_total", r.rhs_total()}, {"fitted_constant", r.fitted_constant},
          {"c_max", r.c_max}, {"graded", r.graded}, {"pass", r.pass}, {"note", r.note}};
}

json to_json(const Check& c) {
  return {{"type", "check"}, {"name", c.name}, {"criterion", c.criterion}, {"value", c.value},
          {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass}, {"note", c.note}};
}

json series(const std::vector<std::pair<double, double>>& v) {
  json j = json::array();
  for (const auto& [a, b] : v) j.push_back({a, b});
  return j;
}

std::vector<double> window_edges(double T, int windows) {
  std::vector<double> e(windows + 1);
  for (int w = 0; w <= windows; ++w) e[w] = T * w / windows;
  return e;
}

TestFunction test_function(const RunConfig& cfg) {
  TestFunction psi;
  psi.cx = cfg.real("residual.cx") * cfg.domain.extent[0];
  psi.rx = cfg.real("residual.rx") * cfg.domain.extent[0];
  psi.cxi = cfg.real("residual.cxi");
  psi.rxi = cfg.real("residual.rxi");
  if (!psi.compactly_supported(cfg.domain.extent[0]))
    throw ConfigError("residual.rx", "test function must be supported inside U x (0, inf)");
  return psi;
}

double initial_mass(const Problem& problem, const ScalarFn& rho0) {
  const Integrator integrator(problem);
  return mass(integrator.init(rho0), problem.grid);
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentOutput heat_oracle(const RunConfig& cfg) {
  if (cfg.m != 1.0) throw ConfigError("coeffs.m", "the heat oracle needs m = 1");
  if (cfg.sigma != SigmaKind::zero && cfg.K > 0)
    throw ConfigError("noise.K", "the heat oracle needs a deterministic run");
  if (cfg.initial.kind != "sine" || cfg.initial.offset != 0.0)
    throw ConfigError("initial.kind", "the heat oracle needs a sine profile without offset");
  if (cfg.solver.fbar.left != 0.0 || cfg.solver.fbar.right != 0.0)
    throw ConfigError("solver.fbar_left", "the heat oracle needs zero boundary data");
  if (cfg.nu_c != 0.0) throw ConfigError("coeffs.nu", "the heat oracle needs nu = 0");

  const Problem problem = make_problem(cfg);
  const double L = cfg.domain.extent[0];
  const double k = cfg.initial.wavenumber * std::numbers::pi / L;
  const double a = cfg.initial.amplitude, alpha = cfg.solver.alpha;
  RunOptions opt;
  opt.snapshot_every = cfg.snapshot_every;
  const Trajectory traj = run(problem, cfg.initial.build(L), cfg.seed, 0, opt);
  require_finite(traj.final_state, "heat-oracle");

  double err = 0.0;
  for (const auto& s : traj.snapshots) {
    const double decay = std::exp(-(1.0 + alpha) * k * k * s.t);
    err = std::max(err, max_error(s.rho, problem.grid.centers(),
                                  [&](double x) { return a * decay * std::sin(k * x); }));
  }

  ExperimentOutput out;
  out.checks.push_back(check_at_most("heat_max_error", "AC-1", err, cfg.real("check.tolerance")));
  out.metrics["max_error"] = err;
  out.metrics["steps"] = traj.dts.size();
  add_trajectory(out, "heat", 0, traj, cfg.write_profiles);
  return out;
}

ExperimentOutput steady_state(const RunConfig& cfg) {
  if (cfg.K > 0 && cfg.sigma != SigmaKind::zero)
    throw ConfigError("noise.K", "the steady state needs a deterministic run");
  if (cfg.nu_c != 0.0) throw ConfigError("coeffs.nu", "the steady state needs nu = 0");
  const Problem problem = make_problem(cfg);
  const double L = cfg.domain.extent[0];
  const auto fb = cfg.solver.fbar;
  const auto& phi_inv = problem.coeffs.phi_inverse;
  const ScalarFn exact = [&](double x) { return phi_inv(fb.left + (fb.right - fb.left) * x / L); };

  RunOptions opt;
  opt.snapshot_every = cfg.snapshot_every;
  const Trajectory traj = run(problem, cfg.initial.build(L), cfg.seed, 0, opt);
  require_finite(traj.final_state, "steady-state");
  const double err = max_error(traj.final_state.rho, problem.grid.centers(), exact);

  const HarmonicStudy hs = harmonic_study(cfg.integer("harmonic.n_cells"));

  ExperimentOutput out;
  out.checks.push_back(check_at_most("steady_state_max_error", "AC-2", err, cfg.real("check.tolerance")));
  out.checks.push_back(check_at_most("harmonic_1d_error", "AC-11", hs.error_1d, 1e-12));
  out.checks.push_back(check_at_most("harmonic_quadratic_error", "AC-11", hs.error_quadratic, 1e-4));
  out.checks.push_back(
      check_within("harmonic_refinement_ratio", "AC-11", hs.ratios.back(), 3.5, 4.5));
  out.metrics["max_error"] = err;
  out.metrics["steps"] = traj.dts.size();
  out.metrics["harmonic"] = {{"error_1d", hs.error_1d}, {"error_quadratic", hs.error_quadratic},
                             {"cells", hs.cells}, {"errors", hs.errors}, {"ratios", hs.ratios}};
  add_trajectory(out, "steady-state", 0, traj, cfg.write_profiles);
  return out;
}

ExperimentOutput contraction(const RunConfig& cfg) {
  const double L = cfg.domain.extent[0];
  const auto a = cfg.initial.build(L), b = cfg.initial_b.build(L);
  const double threshold = cfg.real("check.threshold"), max_fraction = cfg.real("check.max_fraction");

  std::vector<int> levels{cfg.domain.n_cells[0]};
  if (cfg.flag("check.refine")) levels.push_back(2 * levels[0]);

  ExperimentOutput out;
  json per_level = json::array();
  std::vector<double> fractions;
  for (int n : levels) {
    const Problem problem = make_problem(cfg, n);
    ContractionStudy st = contraction_study(problem, a, b, cfg.ensemble_size, cfg.seed,
                                            static_cast<int>(workers_of(cfg)), cfg.snapshot_every);
    // Re-grade with the configured thresholds.
    std::size_t violations = 0;
    for (std::size_t i = 0; i < st.stats.excess.size(); ++i) {
      const bool bad = st.stats.absolute_branch[i] ? st.stats.excess[i] > cfg.real("check.abs_tol")
                                                   : st.stats.excess[i] > threshold;
      violations += bad;
    }
    const double fraction = static_cast<double>(violations) / st.stats.excess.size();
    fractions.push_back(fraction);
    const double worst = *std::max_element(st.stats.excess.begin(), st.stats.excess.end());
    per_level.push_back({{"n_cells", n}, {"violation_fraction", fraction},
                         {"max_excess", worst}, {"clip_fraction", st.clip_fraction},
                         {"excess", st.stats.excess}});
  }
  out.checks.push_back(check_at_most("contraction_violation_fraction", "AC-3", fractions[0], max_fraction));
  if (fractions.size() > 1)
    out.checks.push_back(check_at_most("contraction_fraction_refined", "AC-3", fractions[1], fractions[0]));
  out.metrics["levels"] = per_level;
  return out;
}

ExperimentOutput ito_strat(const RunConfig& cfg) {
  const Problem problem = make_problem(cfg);
  const auto rho0 = cfg.initial.build(cfg.domain.extent[0]);
  const int levels = cfg.integer("sweep.dt_levels");
  if (levels < 3) throw ConfigError("sweep.dt_levels", "needs at least 3 levels for the dt/4 ratio");
  double dt0 = cfg.real("sweep.dt");
  if (dt0 <= 0.0) {
    const Integrator integrator(problem);
    dt0 = integrator.cfl_dt(integrator.init(rho0));
  }
  const double steps = std::ceil(cfg.solver.T / dt0 - 1e-9);
  dt0 = cfg.solver.T / steps;

  const SchemeGapStudy st = scheme_gap_study(problem, rho0, cfg.ensemble_size, cfg.seed, levels,
                                             dt0, static_cast<int>(workers_of(cfg)));
  double worst_step = 0.0;
  for (int l = 1; l < levels; ++l) worst_step = std::max(worst_step, st.gaps[l] / st.gaps[l - 1]);
  const double ratio = st.gaps[0] / st.gaps[2];

  ExperimentOutput out;
  auto mono = check_at_most("scheme_gap_monotone", "AC-4", worst_step, 1.0);
  mono.note = "largest ratio of consecutive gaps";
  out.checks.push_back(mono);
  out.checks.push_back(check_within("scheme_gap_ratio", "AC-4", ratio, cfg.real("check.ratio_lo"),
                                    cfg.real("check.ratio_hi")));
  out.metrics["dts"] = st.dts;
  out.metrics["gaps"] = st.gaps;
  out.metrics["gap_stderr"] = st.gap_stderr;
  out.metrics["paths"] = cfg.ensemble_size;
  return out;
}

std::vector<RunIntegrals> ensemble_integrals(const Problem& problem, const RunConfig& cfg,
                                             const ScalarFn& rho0, const IntegralOptions& io) {
  RunOptions opt;
  opt.snapshot_every = cfg.snapshot_every;
  return parallel_map<RunIntegrals>(cfg.ensemble_size, workers_of(cfg), [&](std::size_t i) {
    return run_with_integrals(problem, rho0, cfg.seed, static_cast<std::uint32_t>(i), opt, io);
  });
}

void add_series(ExperimentOutput& out, const std::string& label, const RunIntegrals& r) {
  for (std::size_t s = 0; s < r.t.size(); ++s) {
    json rec = {{"run", label}, {"member", 0}, {"t", r.t[s]}};
    if (s < r.deviation.size()) rec["deviation"] = r.deviation[s];
    if (s < r.entropy.size()) rec["entropy"] = r.entropy[s];
    out.snapshots.push_back(rec);
  }
}

ExperimentOutput energy(const RunConfig& cfg) {
  const auto rho0 = cfg.initial.build(cfg.domain.extent[0]);
  const double c_max = cfg.real("check.c_max");
  const double k = cfg.real("estimate.k"), eps = cfg.real("estimate.epsilon");
  if (!(k > 0.0 && k < cfg.m + 1.0)) throw ConfigError("estimate.k", "must lie in (0, m + 1)");
  IntegralOptions io;
  io.lk_exponent = k;
  io.band_M1 = cfg.real("estimate.band_M1");
  io.band_M2 = cfg.real("estimate.band_M2");

  ExperimentOutput out;
  std::vector<double> lhs;
  json per_alpha = json::array();
  for (double alpha : cfg.reals("sweep.alphas")) {
    RunConfig c = cfg;
    c.solver.alpha = alpha;
    const Problem problem = make_problem(c);
    const auto ens = ensemble_integrals(problem, c, rho0, io);
    const EstimateContext ctx{problem.grid, problem.coeffs, problem.noise, c.solver.fbar,
                              alpha, c.solver.T, c_max};
    std::ostringstream tag;
    tag << "alpha=" << alpha;
    EstimateReport e = energy_report(ens, ctx);
    e.name += " " + tag.str();
    EstimateReport band = band_energy_report(ens, ctx, io.band_M1, io.band_M2);
    band.name += " " + tag.str();
    EstimateReport lk = lk_norm_report(ens, ctx, k, eps);
    lk.name += " " + tag.str();
    out.checks.push_back(check_at_most("energy_fitted_constant " + tag.str(), "AC-5",
                                       e.fitted_constant, c_max));
    lhs.push_back(e.lhs);
    per_alpha.push_back({{"alpha", alpha}, {"lhs", e.lhs}, {"lhs_stderr", e.lhs_stderr},
                         {"fitted_constant", e.fitted_constant}, {"lk_fitted_constant", lk.fitted_constant}});
    out.reports.push_back(e);
    out.reports.push_back(band);
    out.reports.push_back(lk);
    add_series(out, "energy " + tag.str(), ens.front());
  }
  const auto [lo, hi] = std::minmax_element(lhs.begin(), lhs.end());
  const double spread = *lo > 0.0 ? (*hi - *lo) / *lo : (*hi > 0.0 ? kInf : 0.0);
  auto sc = check_at_most("energy_lhs_spread", "AC-5", spread, cfg.real("check.spread"));
  sc.note = "(max - min) / min over the viscosity sweep";
  out.checks.push_back(sc);
  out.metrics["sweep"] = per_alpha;
  out.metrics["spread"] = spread;
  return out;
}

ExperimentOutput entropy(const RunConfig& cfg) {
  const auto rho0 = cfg.initial.build(cfg.domain.extent[0]);
  const Problem problem = make_problem(cfg);
  if (!(cfg.solver.fbar.left > 0.0 && cfg.solver.fbar.right > 0.0))
    throw ConfigError("solver.fbar_left", "the entropy estimate needs positive boundary data");
  IntegralOptions io;
  io.entropy = true;
  const auto ens = ensemble_integrals(problem, cfg, rho0, io);
  const EstimateContext ctx{problem.grid, problem.coeffs, problem.noise, cfg.solver.fbar,
                            cfg.solver.alpha, cfg.solver.T, cfg.real("check.c_max")};
  const EstimateReport r = entropy_report(ens, ctx);

  ExperimentOutput out;
  out.checks.push_back(check_at_most("entropy_fitted_constant", "", r.fitted_constant, r.c_max));
  out.reports.push_back(r);
  std::uint64_t excluded = 0, faces = 0;
  for (const auto& e : ens) {
    excluded += e.excluded_faces;
    faces += e.faces;
  }
  out.metrics["excluded_faces"] = excluded;
  out.metrics["faces"] = faces;
  add_series(out, "entropy", ens.front());
  return out;
}

json decay_json(const DecayStudy& st) {
  return {{"decay_at_zero", series(decay_at_zero(st.histogram))},
          {"vanish_at_infinity", series(vanish_at_infinity(st.histogram))},
          {"max_rho", st.max_rho}, {"clip_fraction", st.clip_fraction}};
}

double series_at(const std::vector<std::pair<double, double>>& s, double x) {
  for (const auto& [a, v] : s)
    if (std::abs(a - x) <= 1e-12 * x) return v;
  throw ConfigError("kinetic.dyadic_levels", "series has no entry at " + std::to_string(x));
}

ExperimentOutput kinetic_decay(const RunConfig& cfg) {
  const double L = cfg.domain.extent[0];
  const int dyadic = cfg.integer("kinetic.dyadic_levels"), unit = cfg.integer("kinetic.unit_levels");
  const int windows = cfg.integer("kinetic.windows");
  if (dyadic < 7) throw ConfigError("kinetic.dyadic_levels", "needs at least 7 levels to reach 2^-6");
  if (unit < 4) throw ConfigError("kinetic.unit_levels", "needs at least 4 levels");
  const int touching = cfg.integer("kinetic.touching_ensemble") > 0
                           ? cfg.integer("kinetic.touching_ensemble")
                           : cfg.ensemble_size;
  const int workers = static_cast<int>(workers_of(cfg));
  const int n = cfg.domain.n_cells[0];

  const Problem problem = make_problem(cfg);
  const DecayStudy above = kinetic_decay_study(problem, cfg.initial.build(L), cfg.ensemble_size,
                                               cfg.seed, workers, dyadic, unit, windows);
  const DecayStudy touch = kinetic_decay_study(problem, cfg.initial_b.build(L), touching, cfg.seed,
                                               workers, dyadic, unit, windows);

  ExperimentOutput out;
  // Bounded-below data: no measure at small velocities.
  double small = 0.0;
  for (const auto& [beta, v] : decay_at_zero(above.histogram))
    if (beta <= 0.25 + 1e-15) small = std::max(small, v);
  out.checks.push_back(check_at_most("decay_zero_bounded_below", "AC-7", small, 0.0));

  const auto ts = decay_at_zero(touch.histogram);
  const double v2 = series_at(ts, 0.25), v6 = series_at(ts, 1.0 / 64.0);
  auto dc = check_at_most("decay_zero_touching", "AC-7", v6, cfg.real("check.decay_factor") * v2);
  dc.note = "value at beta = 2^-6 against the factor times the value at 2^-2";
  out.checks.push_back(dc);

  for (const auto* st : {&above, &touch}) {
    const std::string tag = st == &above ? "bounded_below" : "touching";
    out.checks.push_back(check_at_most("max_density_" + tag, "AC-8", st->max_rho, 3.0));
    double far = 0.0;
    for (const auto& [M, v] : vanish_at_infinity(st->histogram))
      if (M >= 3.0) far = std::max(far, v);
    out.checks.push_back(check_at_most("vanish_infinity_" + tag, "AC-8", far, 0.0));
  }

  out.checks.push_back(check_at_most("clip_fraction", "AC-6", touch.clip_fraction,
                                     cfg.real("check.clip_fraction")));
  out.checks.push_back(check_at_most("clip_fraction_bounded_below", "AC-6", above.clip_fraction,
                                     cfg.real("check.clip_fraction")));
  out.metrics["bounded_below"] = decay_json(above);
  out.metrics["touching"] = decay_json(touch);
  out.histograms.push_back({"bounded_below n=" + std::to_string(n), above.histogram});
  out.histograms.push_back({"touching n=" + std::to_string(n), touch.histogram});

  if (cfg.flag("check.refine")) {
    const Problem fine = make_problem(cfg, 2 * n);
    const DecayStudy tf = kinetic_decay_study(fine, cfg.initial_b.build(L), touching, cfg.seed,
                                              workers, dyadic, unit, windows);
    auto c = check_at_most("clip_fraction_refined", "AC-6", tf.clip_fraction, touch.clip_fraction);
    c.note = "refined-grid clipped fraction against the base grid";
    out.checks.push_back(c);
    out.metrics["touching_refined"] = decay_json(tf);
    out.histograms.push_back({"touching n=" + std::to_string(2 * n), tf.histogram});
  }
  return out;
}

ExperimentOutput residual(const RunConfig& cfg) {
  const double L = cfg.domain.extent[0];
  const auto rho0 = cfg.initial.build(L);
  const TestFunction psi = test_function(cfg);
  const int n = cfg.domain.n_cells[0];
  ExperimentOutput out;

  // Deterministic sub-case: K = 0, dt proportional to h^2.
  RunConfig det = cfg;
  det.K = 0;
  std::vector<double> det_res;
  json det_json = json::array();
  double dt = 0.0;
  for (int level = 0; level < 2; ++level) {
    const int cells = n << level;
    Problem p = make_problem(det, cells);
    if (level == 0) {
      const Integrator integrator(p);
      dt = integrator.cfl_dt(integrator.init(rho0));
      dt = cfg.solver.T / std::ceil(cfg.solver.T / dt - 1e-9);
    } else {
      dt /= 4.0;
    }
    p.cfg.dt = dt;
    const KineticResidual r = residual_run(p, rho0, psi, cfg.seed, 0, p.grid.h());
    det_res.push_back(std::abs(r.residual));
    det_json.push_back({{"n_cells", cells}, {"dt", dt}, {"residual", r.residual},
                        {"chi_t", r.chi_t}, {"chi_0", r.chi_0}, {"flux", r.flux},
                        {"measure", r.measure}, {"drift", r.drift}});
  }
  const double ratio = det_res[1] > 0.0 ? det_res[0] / det_res[1] : kInf;
  out.checks.push_back(check_within("residual_refinement_ratio", "AC-9", ratio,
                                    cfg.real("check.ratio_lo"), cfg.real("check.ratio_hi")));

  // Stochastic case over the ensemble.
  const Problem problem = make_problem(cfg);
  const auto res = parallel_map<KineticResidual>(cfg.ensemble_size, workers_of(cfg), [&](std::size_t i) {
    return residual_run(problem, rho0, psi, cfg.seed, static_cast<std::uint32_t>(i), problem.grid.h());
  });
  double mean = 0.0, sq = 0.0;
  for (const auto& r : res) mean += r.residual;
  mean /= res.size();
  for (const auto& r : res) sq += (r.residual - mean) * (r.residual - mean);
  const double se = res.size() > 1 ? std::sqrt(sq / (res.size() - 1) / res.size()) : kInf;
  const double z = se > 0.0 ? std::abs(mean) / se : (mean == 0.0 ? 0.0 : kInf);
  auto zc = check_at_most("residual_mean_standard_errors", "AC-9", z, cfg.real("check.stderr_multiple"));
  zc.note = "|ensemble mean| / standard error";
  out.checks.push_back(zc);

  // Integration by parts on the initial profile under two refinements.
  const IbpStudy ibp = ibp_study(rho0, psi, L, {n, 2 * n, 4 * n});
  const double c_max = *std::max_element(ibp.constant.begin(), ibp.constant.end());
  auto ic = check_at_most("ibp_constant_growth", "AC-10", c_max / ibp.constant.front(), 1.25);
  ic.note = "largest discrepancy / h over the coarsest value";
  out.checks.push_back(ic);

  json stoch = json::array();
  for (const auto& r : res) stoch.push_back(r.residual);
  out.metrics["deterministic"] = det_json;
  out.metrics["deterministic_ratio"] = ratio;
  out.metrics["stochastic"] = {{"mean", mean}, {"stderr", se}, {"residuals", stoch}};
  out.metrics["ibp"] = {{"cells", ibp.cells}, {"discrepancy", ibp.discrepancy}, {"constant", ibp.constant}};
  return out;
}

ExperimentOutput galerkin_cross(const RunConfig& cfg) {
  const double L = cfg.domain.extent[0];
  const auto rho0 = cfg.initial.build(L);
  ExperimentOutput out;

  RunConfig det = cfg;
  det.K = 0;
  det.solver.boundary = BoundaryMode::dirichlet;
  Problem fv = make_problem(det);
  fv.cfg.scheme = Scheme::ito_euler;
  Problem sp = make_problem(det);
  sp.cfg.scheme = Scheme::galerkin_spectral;
  RunOptions opt;
  opt.snapshot_every = cfg.snapshot_every;
  const Trajectory a = run(fv, rho0, cfg.seed, 0, opt);
  const Trajectory b = run(sp, rho0, cfg.seed, 0, opt);
  require_finite(a.final_state, "galerkin-cross finite volume");
  require_finite(b.final_state, "galerkin-cross spectral");
  const double diff = max_abs_diff(a.final_state.rho, b.final_state.rho);
  out.checks.push_back(check_at_most("galerkin_fv_max_difference", "AC-12", diff,
                                     cfg.real("check.tolerance")));
  add_trajectory(out, "finite-volume", 0, a, cfg.write_profiles);
  add_trajectory(out, "spectral", 0, b, cfg.write_profiles);

  Problem periodic = make_problem(cfg);
  periodic.cfg.boundary = BoundaryMode::periodic;
  periodic.cfg.galerkin_modes = 0;
  const ConservationStudy cs = conservation_study(periodic, rho0, cfg.integer("conservation.steps"), cfg.seed);
  json drift = json::object();
  for (std::size_t s = 0; s < cs.schemes.size(); ++s) {
    out.checks.push_back(check_at_most("mass_drift " + cs.schemes[s], "AC-13", cs.drift[s],
                                       cfg.real("check.drift")));
    drift[cs.schemes[s]] = cs.drift[s];
  }
  out.metrics["max_difference"] = diff;
  out.metrics["mass_drift"] = drift;
  out.metrics["spectral_modes"] = Integrator(sp).galerkin()->modes();
  return out;
}

const std::vector<CatalogueEntry> kCatalogue = {
    {"heat-oracle", "Linear heat equation against its exact sine-mode solution",
     "deterministic linear case of the regularised equation", {"AC-1"}},
    {"steady-state", "Porous-medium relaxation to the harmonic steady state; harmonic solver oracles",
     "Dirichlet problem with Phi(rho) harmonic at equilibrium", {"AC-2", "AC-11"}},
    {"contraction", "Coupled pairs on shared noise: L1 contraction statistics",
     "L1 contraction of two stochastic kinetic solutions", {"AC-3"}},
    {"ito-strat", "Ito-Euler against Stratonovich-Heun on common Brownian paths",
     "Ito-to-Stratonovich conversion of the noise", {"AC-4"}},
    {"energy", "Energy estimate across a viscosity sweep, with band and L1_t L^k_x reports",
     "first energy estimate of the regularised solution", {"AC-5"}},
    {"entropy", "Entropy estimate of the regularised solution",
     "entropy estimate via Ito's formula", {}},
    {"kinetic-decay", "Kinetic measure near zero and at infinity; positivity ledger",
     "decay of the kinetic measure at zero and vanishing at infinity", {"AC-6", "AC-7", "AC-8"}},
    {"residual", "Residual of the kinetic equation and the integration-by-parts identity",
     "kinetic equation tested against compactly supported functions", {"AC-9", "AC-10"}},
    {"galerkin-cross", "Spectral Galerkin against finite volumes; periodic mass conservation",
     "finite-dimensional Galerkin reduction of the regularised equation", {"AC-12", "AC-13"}},
};

int exit_code_of(const ExperimentOutput& out) { return out.pass() ? exit_ok : exit_check_failed; }

}  // namespace

// ---------------------------------------------------------------------------

Check check_at_most(std::string name, std::string criterion, double value, double limit) {
  Check c{std::move(name), std::move(criterion), value, -kInf, limit, false, ""};
  c.pass = value <= limit;
  return c;
}

Check check_at_least(std::string name, std::string criterion, double value, double limit) {
  Check c{std::move(name), std::move(criterion), value, limit, kInf, false, ""};
  c.pass = value >= limit;
  return c;
}

Check check_within(std::string name, std::string criterion, double value, double lo, double hi) {
  Check c{std::move(name), std::move(criterion), value, lo, hi, false, ""};
  c.pass = value >= lo && value <= hi;
  return c;
}

bool ExperimentOutput::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  for (const auto& r : reports)
    if (r.graded && !r.pass) return false;
  return true;
}

const std::vector<CatalogueEntry>& experiment_catalogue() { return kCatalogue; }

const char* library_version() { return "0.1.0"; }

ExperimentOutput run_experiment(const RunConfig& cfg) {
  ExperimentOutput out;
  const std::string& e = cfg.experiment;
  if (e == "heat-oracle") out = heat_oracle(cfg);
  else if (e == "steady-state") out = steady_state(cfg);
  else if (e == "contraction") out = contraction(cfg);
  else if (e == "ito-strat") out = ito_strat(cfg);
  else if (e == "energy") out = energy(cfg);
  else if (e == "entropy") out = entropy(cfg);
  else if (e == "kinetic-decay") out = kinetic_decay(cfg);
  else if (e == "residual") out = residual(cfg);
  else if (e == "galerkin-cross") out = galerkin_cross(cfg);
  else throw ConfigError("experiment", "unknown experiment '" + e + "'");
  out.experiment = e;
  return out;
}

void write_artifacts(const std::string& dir, const RunConfig& cfg, const ExperimentOutput& out,
                     int exit_code) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create output directory '" + dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + (fs::path(dir) / name).string() + "'");
    return f;
  };

  {
    auto f = open("snapshots.ndjson");
    for (const auto& s : out.snapshots) f << s.dump() << '\n';
  }
  {
    auto f = open("reports.ndjson");
    for (const auto& r : out.reports) f << to_json(r).dump() << '\n';
    for (const auto& c : out.checks) f << to_json(c).dump() << '\n';
  }
  {
    auto f = open("histograms.csv");
    for (const auto& h : out.histograms) {
      f << "# " << h.label << '\n';
      write_csv(f, h.histogram);
    }
  }
  json checks = json::array();
  for (const auto& c : out.checks) checks.push_back(to_json(c));
  json config = json::object();
  for (const auto& [k, v] : cfg.flat) config[k] = v;
  const json manifest = {{"experiment", cfg.experiment},
                         {"version", library_version()},
                         {"compiler", __VERSION__},
                         {"seed", cfg.seed},
                         {"config", config},
                         {"checks", checks},
                         {"pass", out.pass()},
                         {"exit_code", exit_code},
                         {"metrics", out.metrics}};
  auto f = open("manifest.json");
  f << manifest.dump(2) << '\n';
}

int run_config_map(const std::map<std::string, std::string>& values,
                   const std::optional<std::string>& out_dir, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = resolve_config(values);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return exit_config_error;
  }
  if (out_dir) {
    cfg.output_dir = *out_dir;
  } else if (const char* env = std::getenv("DK_OUTPUT_DIR"); env && *env) {
    cfg.output_dir = env;
  }
  cfg.flat["output.dir"] = cfg.output_dir;

  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput out;
  int code = exit_ok;
  try {
    out = run_experiment(cfg);
    code = exit_code_of(out);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const InvalidArgument& e) {
    log << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const NumericalError& e) {
    log << "numerical failure at step " << e.step_index() << ": " << e.what() << '\n';
    out.experiment = cfg.experiment;
    out.metrics["error"] = e.what();
    code = exit_numerical_failure;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    write_artifacts(cfg.output_dir, cfg, out, code);
  } catch (const InvalidArgument& e) {
    log << "output error: " << e.what() << '\n';
    return exit_config_error;
  }
  for (const auto& c : out.checks)
    log << (c.pass ? "PASS " : "FAIL ") << c.name << (c.criterion.empty() ? "" : " [" + c.criterion + "]")
        << " value=" << c.value << '\n';
  log << cfg.experiment << ": exit " << code << " in " << seconds << " s, artifacts in "
      << cfg.output_dir << '\n';
  return code;
}

int run_config_file(const std::string& path, const std::optional<std::string>& out_dir,
                    std::ostream& log) {
  std::map<std::string, std::string> values;
  try {
    values = read_config_file(path);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return exit_config_error;
  }
  return run_config_map(values, out_dir, log);
}

int replay_manifest(const std::string& manifest_path, const std::optional<std::string>& out_dir,
                    std::ostream& log) {
  std::ifstream in(manifest_path);
  if (!in) {
    log << "config error: cannot open manifest '" << manifest_path << "'\n";
    return exit_config_error;
  }
  std::map<std::string, std::string> values;
  try {
    const json m = json::parse(in);
    for (const auto& [k, v] : m.at("config").items()) values[k] = v.get<std::string>();
  } catch (const json::exception& e) {
    log << "config error: malformed manifest: " << e.what() << '\n';
    return exit_config_error;
  }
  const std::string dir =
      out_dir ? *out_dir : (fs::path(manifest_path).parent_path() / "replay").string();
  return run_config_map(values, dir, log);
}

// ---------------------------------------------------------------------------
// Studies

HarmonicStudy harmonic_study(int n_cells) {
  HarmonicStudy out;
  {
    DomainSpec spec;
    spec.n_cells = {n_cells, 1};
    const Grid grid = build_grid(spec);
    const HarmonicField f = solve_dirichlet_laplace(grid, BoundaryData{0.5, 2.0});
    out.error_1d = max_error(f.values, grid.centers(), [](double x) { return 0.5 + 1.5 * x; });
  }
  auto planar = [](int n, const BoundaryFn& exact) {
    DomainSpec spec;
    spec.dimension = 2;
    spec.n_cells = {n, n};
    const Grid grid = build_grid(spec);
    const HarmonicField f = solve_dirichlet_laplace(grid, exact);
    const double h = 1.0 / n;
    double e = 0.0;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        e = std::max(e, std::abs(f.values[static_cast<std::size_t>(j) * (n + 1) + i] - exact(i * h, j * h)));
    return e;
  };
  out.error_quadratic = planar(n_cells, [](double x, double y) { return x * x - y * y; });
  const BoundaryFn smooth = [](double x, double y) { return std::exp(x) * std::cos(y); };
  for (int n : {n_cells / 4, n_cells / 2, n_cells}) {
    out.cells.push_back(n);
    out.errors.push_back(planar(n, smooth));
  }
  for (std::size_t i = 0; i + 1 < out.errors.size(); ++i)
    out.ratios.push_back(out.errors[i] / out.errors[i + 1]);
  return out;
}

ContractionStudy contraction_study(const Problem& problem, const ScalarFn& a, const ScalarFn& b,
                                   int members, std::uint64_t seed, int workers,
                                   double snapshot_every) {
  RunOptions opt;
  opt.snapshot_every = snapshot_every;
  const auto pairs = parallel_map<PairSeries>(members, workers, [&](std::size_t i) {
    auto p = run_coupled_pair(problem, a, b, seed, static_cast<std::uint32_t>(i), opt);
    require_finite(p.a, "contraction");
    require_finite(p.b, "contraction");
    return p;
  });
  ContractionStudy out;
  out.stats = contraction_report(pairs);
  const double ma = initial_mass(problem, a), mb = initial_mass(problem, b);
  for (const auto& p : pairs)
    out.clip_fraction = std::max({out.clip_fraction, p.a.clip_ledger / ma, p.b.clip_ledger / mb});
  return out;
}

SchemeGapStudy scheme_gap_study(const Problem& problem, const ScalarFn& rho0, int members,
                                std::uint64_t seed, int levels, double dt0, int workers) {
  if (levels < 2) throw InvalidArgument("need at least two time-step levels");
  const double h = problem.grid.h();
  // Squared L2 gaps per member and level.
  const auto sq = parallel_map<std::vector<double>>(members, workers, [&](std::size_t m) {
    std::vector<double> g(levels);
    for (int l = 0; l < levels; ++l) {
      std::vector<double> fin[2];
      for (int s = 0; s < 2; ++s) {
        Problem p = problem;
        p.cfg.scheme = s == 0 ? Scheme::ito_euler : Scheme::stratonovich_heun;
        p.cfg.dt = dt0 / (1 << l);
        RunOptions opt;
        opt.aggregate = 1 << (levels - 1 - l);
        opt.keep_rho = false;
        auto traj = run(p, rho0, seed, static_cast<std::uint32_t>(m), opt);
        require_finite(traj.final_state, "ito-strat");
        fin[s] = std::move(traj.final_state.rho);
      }
      double d = 0.0;
      for (std::size_t i = 0; i < fin[0].size(); ++i) d += (fin[0][i] - fin[1][i]) * (fin[0][i] - fin[1][i]);
      g[l] = d * h;
    }
    return g;
  });
  SchemeGapStudy out;
  for (int l = 0; l < levels; ++l) {
    double mean = 0.0, var = 0.0;
    for (const auto& g : sq) mean += g[l];
    mean /= members;
    for (const auto& g : sq) var += (g[l] - mean) * (g[l] - mean);
    var = members > 1 ? var / (members - 1) : 0.0;
    const double gap = std::sqrt(mean);
    out.dts.push_back(dt0 / (1 << l));
    out.gaps.push_back(gap);
    out.gap_stderr.push_back(gap > 0.0 ? std::sqrt(var / members) / (2.0 * gap) : 0.0);
  }
  return out;
}

DecayStudy kinetic_decay_study(const Problem& problem, const ScalarFn& rho0, int members,
                               std::uint64_t seed, int workers, int dyadic_levels,
                               int unit_levels, int windows) {
  const double T = problem.cfg.T;
  struct Member {
    KineticHistogram hist;
    double max_rho = 0.0, clip = 0.0;
  };
  const auto runs = parallel_map<Member>(members, workers, [&](std::size_t i) {
    Member m;
    m.hist = make_histogram(dyadic_levels, unit_levels, window_edges(T, windows));
    RunOptions opt;
    opt.keep_rho = false;
    auto measure = kinetic_observer(m.hist, problem.grid, problem.coeffs, problem.cfg.alpha);
    opt.observer = [&](const FieldState& s, double dt, std::span<const double> dW) {
      measure(s, dt, dW);
      for (double r : s.rho) m.max_rho = std::max(m.max_rho, r);
    };
    const Trajectory traj = run(problem, rho0, seed, static_cast<std::uint32_t>(i), opt);
    require_finite(traj.final_state, "kinetic-decay");
    for (double r : traj.final_state.rho) m.max_rho = std::max(m.max_rho, r);
    m.clip = traj.final_state.clip_ledger / traj.initial_mass;
    return m;
  });
  DecayStudy out;
  out.histogram = make_histogram(dyadic_levels, unit_levels, window_edges(T, windows));
  for (const auto& m : runs) {
    out.histogram += m.hist;
    out.max_rho = std::max(out.max_rho, m.max_rho);
    out.clip_fraction = std::max(out.clip_fraction, m.clip);
  }
  out.histogram.scale(1.0 / members);
  return out;
}

KineticResidual residual_run(const Problem& problem, const ScalarFn& rho0,
                             const TestFunction& psi, std::uint64_t seed, std::uint32_t member,
                             double d_xi) {
  KineticResidualAccumulator acc(problem.grid, problem.coeffs, problem.noise, problem.cfg.alpha,
                                 psi, problem.cfg.fbar, d_xi);
  const Integrator integrator(problem);
  acc.begin(integrator.init(rho0));
  RunOptions opt;
  opt.keep_rho = false;
  opt.observer = acc.observer();
  const Trajectory traj = run(problem, rho0, seed, member, opt);
  require_finite(traj.final_state, "residual");
  return acc.finish(traj.final_state);
}

IbpStudy ibp_study(const ScalarFn& profile, const TestFunction& psi, double extent,
                   std::vector<int> cells) {
  IbpStudy out;
  out.cells = std::move(cells);
  for (int n : out.cells) {
    DomainSpec spec;
    spec.extent = {extent, 1.0};
    spec.n_cells = {n, 1};
    const Grid grid = build_grid(spec);
    std::vector<double> rho(grid.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = profile(grid.centers()[i]);
    const IbpCheck c = integration_by_parts_check(rho, grid, psi, grid.h());
    out.discrepancy.push_back(c.discrepancy);
    out.constant.push_back(c.discrepancy / grid.h());
  }
  return out;
}

ConservationStudy conservation_study(const Problem& problem, const ScalarFn& rho0, int steps,
                                     std::uint64_t seed) {
  if (problem.cfg.boundary != BoundaryMode::periodic)
    throw InvalidArgument("conservation runs in periodic mode");
  ConservationStudy out;
  for (Scheme scheme : {Scheme::ito_euler, Scheme::stratonovich_heun, Scheme::galerkin_spectral}) {
    Problem p = problem;
    p.cfg.scheme = scheme;
    const Integrator integrator(p);
    BrownianStream stream(seed, 0, p.noise.K());
    FieldState s = integrator.init(rho0);
    const double m0 = mass(s, p.grid);
    const double dt = p.cfg.dt ? *p.cfg.dt : integrator.cfl_dt(s);
    std::vector<double> dW(p.noise.K());
    double drift = 0.0;
    for (int k = 0; k < steps; ++k) {
      stream.sample_increments(dt, dW);
      integrator.step(s, dt, dW, &stream);
      require_finite(s, "conservation");
      drift = std::max(drift, std::abs(mass(s, p.grid) - m0) / m0);
    }
    out.schemes.push_back(to_string(scheme));
    out.drift.push_back(drift);
  }
  return out;
}

}  // namespace dk

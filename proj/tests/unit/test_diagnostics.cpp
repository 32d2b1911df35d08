#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dk/diagnostics.hpp"
#include "dk/error.hpp"
#include "gen.hpp"

using namespace dk;

namespace {

Problem make(int n, double m, int K, SolverConfig cfg) {
  DomainSpec s;
  s.n_cells = {n, 1};
  Grid g = build_grid(s);
  CoefficientSet c = smooth_sigma(make_model_case(m, SigmaKind::sqrt), 4);
  NoiseModel nm = make_sine_modes(g, K, 2.0, 0.5);
  return Problem{std::move(g), std::move(c), std::move(nm), cfg};
}

Trajectory constant_trajectory(int n, double value, std::vector<double> times) {
  Trajectory t;
  for (double s : times) {
    Snapshot sn;
    sn.t = s;
    sn.rho.assign(n, value);
    t.snapshots.push_back(sn);
  }
  return t;
}

constexpr double pi = std::numbers::pi;

}  // namespace

TEST_CASE("grading rule") {
  EstimateReport r;
  r.lhs = 1.0;
  r.lhs_stderr = 0.5;
  r.rhs_terms = {{"a", 1.0}, {"b", 3.0}};
  r.c_max = 0.6;
  grade(r);
  CHECK(r.fitted_constant == doctest::Approx(0.5));
  CHECK(r.pass);
  r.rhs_terms = {{"a", 0.0}};
  grade(r);
  CHECK(std::isinf(r.fitted_constant));
  CHECK_FALSE(r.pass);
  CHECK_THROWS_AS(r.term("missing"), InvalidArgument);
}

TEST_CASE("entropy integral closed forms") {
  const std::vector<double> e(10, std::exp(1.0));
  CHECK(entropy_integral(e, 0.1) == doctest::Approx(std::exp(1.0)));
  const std::vector<double> z(10, 0.0);
  CHECK(entropy_integral(z, 0.1) == 0.0);
}

TEST_CASE("stationary constant state: zero gradients and zero deviation") {
  SolverConfig cfg;
  cfg.fbar = {1.0, 1.0};
  cfg.T = 0.1;
  const Problem p = make(32, 2.0, 0, cfg);
  RunOptions opt;
  opt.snapshot_every = 0.02;
  IntegralOptions io;
  io.entropy = true;
  const RunIntegrals r = run_with_integrals(p, [](double) { return 1.0; }, 1, 0, opt, io);
  CHECK(r.grad_theta_sq == doctest::Approx(0.0).scale(1.0));
  CHECK(r.grad_rho_sq == doctest::Approx(0.0).scale(1.0));
  for (double d : r.deviation) CHECK(d == doctest::Approx(0.0).scale(1.0));
  for (double e : r.entropy) CHECK(e == doctest::Approx(r.entropy.front()).scale(1.0));
  const std::vector<RunIntegrals> ens{r};
  const EstimateContext ctx{p.grid, p.coeffs, p.noise, cfg.fbar, 0.0, cfg.T, 10.0};
  CHECK(energy_report(ens, ctx).lhs == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("L^k report on rho = 1 with m = 2, k = 2, T = 1") {
  SolverConfig cfg;
  cfg.fbar = {1.0, 1.0};
  cfg.T = 1.0;
  cfg.dt_max = 0.05;
  const Problem p = make(16, 2.0, 0, cfg);
  IntegralOptions io;
  io.lk_exponent = 2.0;
  const RunIntegrals r = run_with_integrals(p, [](double) { return 1.0; }, 1, 0, {}, io);
  const std::vector<RunIntegrals> ens{r};
  const EstimateContext ctx{p.grid, p.coeffs, p.noise, cfg.fbar, 0.0, cfg.T, 10.0};
  CHECK(lk_norm_report(ens, ctx, 2.0, 1.0).lhs == doctest::Approx(1.0));
  CHECK_THROWS_AS(lk_norm_report(ens, ctx, 3.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(energy_report({}, ctx), InvalidArgument);
}

TEST_CASE("property: energy LHS terms are non-negative and monotone in the horizon") {
  Gen gen(11);
  for (int c = 0; c < 4; ++c) {
    SolverConfig cfg;
    cfg.fbar = {1.0, 1.0};
    cfg.alpha = gen.uniform(0.0, 0.1);
    const double amp = gen.uniform(0.1, 0.9);
    double prev_grad = 0.0;
    for (double T : {0.02, 0.04}) {
      cfg.T = T;
      const Problem p = make(32, 2.0, 2, cfg);
      RunOptions opt;
      opt.snapshot_every = 0.01;
      const RunIntegrals r =
          run_with_integrals(p, [&](double x) { return 1.0 + amp * std::sin(pi * x); }, 7, c, opt);
      const std::vector<RunIntegrals> ens{r};
      const EstimateContext ctx{p.grid, p.coeffs, p.noise, cfg.fbar, cfg.alpha, T, 10.0};
      const EstimateReport e = energy_report(ens, ctx);
      CHECK(e.lhs >= 0.0);
      for (const auto& [k, v] : e.rhs_terms) CHECK(v >= 0.0);
      CHECK(r.grad_theta_sq >= prev_grad);
      prev_grad = r.grad_theta_sq;
    }
  }
}

TEST_CASE("contraction statistics") {
  PairSeries a;
  a.distance = {1.0, 0.9, 1.05};
  a.running_sup = {1.0, 1.0, 1.05};
  PairSeries b;
  b.distance = {0.0, 0.0};
  b.running_sup = {0.0, 0.0};
  const std::vector<PairSeries> pairs{a, b};
  const ContractionStats s = contraction_report(pairs, 0.02, 1e-12);
  CHECK(s.excess[0] == doctest::Approx(0.05));
  CHECK(s.absolute_branch[1]);
  CHECK(s.violations == 1);
  CHECK(s.violation_fraction == doctest::Approx(0.5));
}

TEST_CASE("metric D: identity, symmetry and the triangle inequality") {
  CHECK(metric_D(constant_trajectory(8, 1.0, {0, 1}), constant_trajectory(8, 1.0, {0, 1}), 0.125).value == 0.0);
  Gen gen(12);
  for (int c = 0; c < kCases; ++c) {
    std::vector<Trajectory> t(3);
    for (auto& tr : t) {
      for (double s : {0.0, 0.5, 1.0}) {
        Snapshot sn;
        sn.t = s;
        sn.rho = gen.profile(8, 0.0, 2.0);
        tr.snapshots.push_back(sn);
      }
    }
    const double fg = metric_D(t[0], t[1], 0.125).value, gf = metric_D(t[1], t[0], 0.125).value;
    const double gh = metric_D(t[1], t[2], 0.125).value, fh = metric_D(t[0], t[2], 0.125).value;
    CHECK(fg == doctest::Approx(gf).epsilon(1e-14));
    CHECK(fh <= fg + gh + 1e-14);
    CHECK(fg >= 0.0);
  }
  CHECK_THROWS_AS(metric_D(constant_trajectory(8, 1.0, {0, 1}), constant_trajectory(16, 1.0, {0, 1}), 0.125),
                  InvalidArgument);
}

TEST_CASE("metric D ignores differences below the vacuum cutoffs") {
  const int k_max = 10;
  const double tiny = 0.25 / k_max;
  const MetricD d = metric_D(constant_trajectory(8, 0.0, {0, 1}), constant_trajectory(8, tiny, {0, 1}), 0.125, k_max);
  CHECK(d.tail_bound == doctest::Approx(std::ldexp(1.0, -k_max)));
  CHECK(d.value <= d.tail_bound + 1e-3);
}

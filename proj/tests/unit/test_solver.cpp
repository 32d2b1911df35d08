#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dk/error.hpp"
#include "dk/runner.hpp"
#include "gen.hpp"

using namespace dk;

namespace {

Problem make(int n, double m, int K, double scale, SolverConfig cfg, int smoothing = 4) {
  DomainSpec s;
  s.n_cells = {n, 1};
  Grid g = build_grid(s);
  CoefficientSet c = make_model_case(m, SigmaKind::sqrt);
  if (smoothing > 0) c = smooth_sigma(c, smoothing);
  NoiseModel nm = make_sine_modes(g, K, 2.0, scale);
  return Problem{std::move(g), std::move(c), std::move(nm), cfg};
}

double total(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (double x : v) s += x * h;
  return s;
}

constexpr double pi = std::numbers::pi;

}  // namespace

TEST_CASE("property: periodic steps conserve mass for every scheme") {
  Gen gen(6);
  for (int c = 0; c < 30; ++c) {
    SolverConfig cfg;
    cfg.boundary = BoundaryMode::periodic;
    cfg.scheme = static_cast<Scheme>(gen.integer(0, 2));
    cfg.alpha = gen.uniform(0.0, 0.1);
    const int n = 2 * gen.integer(8, 40);
    const Problem p = make(n, gen.uniform(1.0, 3.0), gen.integer(0, 6), gen.uniform(0.0, 1.0), cfg);
    const double amp = gen.uniform(0.0, 0.8), k = gen.integer(1, 3);
    const Integrator in(p);
    FieldState s = in.init([&](double x) { return 1.0 + amp * std::sin(2.0 * pi * k * x); });
    const double m0 = mass(s, p.grid);
    BrownianStream stream(c, 0, p.noise.K());
    for (int k2 = 0; k2 < 50; ++k2) {
      const auto dW = stream.sample_increments(in.cfl_dt(s));
      in.step(s, in.cfl_dt(s), dW, &stream);
    }
    CHECK(std::abs(mass(s, p.grid) - m0) <= 1e-13 * m0);
  }
}

TEST_CASE("constant Dirichlet state is stationary without noise") {
  SolverConfig cfg;
  cfg.fbar = {4.0, 4.0};
  cfg.T = 0.05;
  for (Scheme sc : {Scheme::ito_euler, Scheme::stratonovich_heun, Scheme::galerkin_spectral}) {
    cfg.scheme = sc;
    const Problem p = make(32, 2.0, 0, 1.0, cfg);
    const Trajectory t = run(p, [](double) { return 2.0; }, 1, 0);
    for (double r : t.final_state.rho) CHECK(r == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("Euler and Heun agree without noise") {
  SolverConfig cfg;
  cfg.fbar = {1.0, 1.0};
  cfg.T = 0.02;
  cfg.dt = 1e-5;
  const auto rho0 = [](double x) { return 1.0 + 0.5 * std::sin(pi * x); };
  const Problem a = make(32, 2.0, 0, 1.0, cfg);
  SolverConfig h = cfg;
  h.scheme = Scheme::stratonovich_heun;
  const Problem b = make(32, 2.0, 0, 1.0, h);
  const auto ra = run(a, rho0, 1, 0).final_state.rho, rb = run(b, rho0, 1, 0).final_state.rho;
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i] == doctest::Approx(rb[i]).epsilon(1e-12));
}

TEST_CASE("runs are reproducible bit for bit") {
  SolverConfig cfg;
  cfg.fbar = {1.0, 1.0};
  cfg.T = 0.01;
  const Problem p = make(32, 1.0, 4, 1.0, cfg);
  const auto rho0 = [](double x) { return 1.0 + 0.5 * std::sin(pi * x); };
  CHECK(run(p, rho0, 3, 2).final_state.rho == run(p, rho0, 3, 2).final_state.rho);
  CHECK(run(p, rho0, 3, 2).final_state.rho != run(p, rho0, 3, 3).final_state.rho);
}

TEST_CASE("clipping is recorded in the mass ledger") {
  SolverConfig cfg;
  cfg.fbar = {0.0, 0.0};
  cfg.T = 0.05;
  const Problem p = make(32, 1.0, 4, 3.0, cfg);
  const auto rho0 = [](double x) { return 0.05 * std::sin(pi * x); };
  const Trajectory t = run(p, rho0, 1, 0);
  for (double r : t.final_state.rho) CHECK(r >= 0.0);
  CHECK(t.final_state.clip_ledger >= 0.0);
  // mass(T) = mass(0) + inflow + clipped mass
  const double m = total(t.final_state.rho, p.grid.h());
  CHECK(m == doctest::Approx(t.initial_mass + t.final_state.boundary_inflow + t.final_state.clip_ledger)
                 .epsilon(1e-10));
}

TEST_CASE("Galerkin projection round-trips modal coefficients") {
  SolverConfig cfg;
  cfg.fbar = {1.0, 1.0};
  cfg.scheme = Scheme::galerkin_spectral;
  cfg.galerkin_modes = 15;
  const Problem p = make(32, 2.0, 0, 1.0, cfg);
  const Integrator in(p);
  const GalerkinStepper& gs = *in.galerkin();
  CHECK(gs.modes() == 15);
  Gen gen(7);
  std::vector<double> modal(15);
  for (double& a : modal) a = gen.uniform(-1.0, 1.0);
  const auto nodes = gs.reconstruct_nodes(modal);
  const auto back = gs.project_nodes(nodes);
  for (int j = 0; j < 15; ++j) CHECK(back[j] == doctest::Approx(modal[j]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("invalid setups are rejected") {
  SolverConfig cfg;
  cfg.fbar = {-1.0, 1.0};
  CHECK_THROWS_AS(Integrator(make(16, 1.0, 0, 1.0, cfg)), InvalidArgument);
  cfg.fbar = {1.0, 1.0};
  cfg.scheme = Scheme::galerkin_spectral;
  cfg.galerkin_modes = 16;
  CHECK_THROWS_AS(Integrator(make(16, 1.0, 0, 1.0, cfg)), InvalidArgument);
  cfg.scheme = Scheme::ito_euler;
  cfg.dt = 1.0;
  cfg.dt_max = 10.0;
  CHECK_THROWS_AS(run(make(16, 1.0, 0, 1.0, cfg), [](double) { return 1.0; }, 1, 0), InvalidArgument);
}

TEST_CASE("heat case against the decaying sine mode") {
  SolverConfig cfg;
  cfg.T = 0.05;
  DomainSpec s;
  s.n_cells = {64, 1};
  Grid g = build_grid(s);
  NoiseModel nm = make_sine_modes(g, 0, 2.0);
  const Problem p{std::move(g), make_model_case(1.0, SigmaKind::zero), std::move(nm), cfg};
  const Trajectory t = run(p, [](double x) { return std::sin(pi * x); }, 1, 0);
  const auto x = p.grid.centers();
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(t.final_state.rho[i] == doctest::Approx(std::exp(-pi * pi * 0.05) * std::sin(pi * x[i])).epsilon(2e-3).scale(1.0));
}

TEST_CASE("property: coupled pairs contract without noise") {
  Gen gen(8);
  for (int c = 0; c < 10; ++c) {
    SolverConfig cfg;
    cfg.fbar = {1.0, 1.0};
    cfg.T = 0.05;
    const Problem p = make(32, gen.uniform(1.0, 3.0), 0, 1.0, cfg);
    const double a = gen.uniform(0.0, 1.0), b = gen.uniform(0.0, 1.0);
    RunOptions opt;
    opt.snapshot_every = 0.005;
    const PairSeries s = run_coupled_pair(
        p, [&](double x) { return 1.0 + a * std::sin(pi * x); },
        [&](double x) { return 1.0 + b * std::sin(2.0 * pi * x); }, 1, 0, opt);
    for (double d : s.running_sup) CHECK(d <= s.distance.front() * (1.0 + 1e-12));
  }
}

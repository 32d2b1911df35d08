#include "dk/runner.hpp"

#include <cmath>

#include "dk/error.hpp"

namespace dk {
namespace {

// Snapshot times k * every (and T); steps are shortened to land on them.
class Clock {
 public:
  Clock(double T, double every) : T_(T), every_(every) { advance_target(0.0); }

  double next() const { return target_; }
  bool done(double t) const { return t >= T_; }

  // Trims dt so that a step never overshoots the next snapshot time.
  double trim(double t, double dt) const {
    const double room = target_ - t;
    return dt >= room * (1.0 - 1e-10) ? room : dt;
  }

  // Returns true and snaps t when a step landed on the target.
  bool landed(double& t) {
    if (t < target_ * (1.0 - 1e-12) && std::abs(t - target_) > 1e-14) return false;
    t = target_;
    advance_target(t);
    return true;
  }

 private:
  void advance_target(double t) {
    if (every_ > 0.0) {
      const double k = std::floor(t / every_ + 1e-9) + 1.0;
      target_ = std::min(T_, k * every_);
    } else {
      target_ = T_;
    }
  }

  double T_, every_, target_ = 0.0;
};

Snapshot snapshot_of(const FieldState& s, const Grid& grid, bool keep_rho) {
  Snapshot snap;
  snap.t = s.t;
  snap.step = s.step_index;
  if (keep_rho) snap.rho = s.rho;
  snap.mass = mass(s, grid);
  snap.min_rho = min_value(s);
  snap.clip_ledger = s.clip_ledger;
  snap.boundary_inflow = s.boundary_inflow;
  return snap;
}

void draw(const BrownianStream& stream, std::uint64_t step, double dt, int aggregate,
          std::span<double> out) {
  if (aggregate <= 1)
    stream.increments_at(step, dt, out);
  else
    stream.aggregated_increments(step * static_cast<std::uint64_t>(aggregate), aggregate,
                                 dt / aggregate, out);
}

void check_fixed_dt(const Integrator& integrator, const Problem& p, const FieldState& s) {
  if (!p.cfg.dt) return;
  if (!(*p.cfg.dt > 0.0)) throw InvalidArgument("fixed dt must be positive");
  const double limit = integrator.cfl_dt(s, 1.0);
  if (*p.cfg.dt > limit * (1.0 + 1e-12) && limit < p.cfg.dt_max)
    throw InvalidArgument("fixed dt exceeds the stability bound at the initial state");
}

}  // namespace

Integrator::Integrator(const Problem& problem) : problem_(problem) {
  if (problem.cfg.scheme == Scheme::galerkin_spectral)
    galerkin_ = std::make_unique<GalerkinStepper>(problem.grid, problem.coeffs, problem.noise,
                                                  problem.cfg);
  else
    fv_ = std::make_unique<FVStepper>(problem.grid, problem.coeffs, problem.noise, problem.cfg);
}

FieldState Integrator::init(const ScalarFn& rho0) const {
  FieldState s;
  s.alpha = problem_.cfg.alpha;
  if (galerkin_)
    galerkin_->load(s, rho0);
  else
    s = make_state(problem_.grid, rho0, problem_.cfg.alpha);
  for (double r : s.rho)
    if (!std::isfinite(r)) throw InvalidArgument("initial profile must be finite");
  return s;
}

double Integrator::cfl_dt(const FieldState& state, double theta) const {
  return galerkin_ ? galerkin_->cfl_dt(state, theta) : fv_->cfl_dt(state, theta);
}

double Integrator::cfl_dt(const FieldState& state) const {
  return cfl_dt(state, problem_.cfg.cfl_theta);
}

void Integrator::step(FieldState& state, double dt, std::span<const double> dW,
                      const BrownianStream* stream) const {
  if (galerkin_)
    galerkin_->step(state, dt, dW);
  else
    fv_->step(state, dt, dW, stream);
}

Trajectory run(const Problem& problem, const ScalarFn& rho0, std::uint64_t seed,
               std::uint32_t member, const RunOptions& options) {
  const Integrator integrator(problem);
  const BrownianStream stream(seed, member, problem.noise.K());
  const double T = problem.cfg.T;
  if (!(T >= 0.0)) throw InvalidArgument("final time must be non-negative");

  Trajectory traj;
  FieldState s = integrator.init(rho0);
  check_fixed_dt(integrator, problem, s);
  traj.initial_mass = mass(s, problem.grid);
  traj.snapshots.push_back(snapshot_of(s, problem.grid, options.keep_rho));

  Clock clock(T, options.snapshot_every);
  std::vector<double> dW(problem.noise.K());
  while (!clock.done(s.t)) {
    double dt = problem.cfg.dt ? *problem.cfg.dt : integrator.cfl_dt(s);
    dt = clock.trim(s.t, dt);
    draw(stream, s.step_index, dt, options.aggregate, dW);
    if (options.observer) options.observer(s, dt, dW);
    integrator.step(s, dt, dW, &stream);
    traj.dts.push_back(dt);
    if (options.record_increments) traj.increments.insert(traj.increments.end(), dW.begin(), dW.end());
    if (clock.landed(s.t) || options.every_step)
      traj.snapshots.push_back(snapshot_of(s, problem.grid, options.keep_rho));
  }
  traj.final_state = std::move(s);
  return traj;
}

double l1_distance(std::span<const double> a, std::span<const double> b, double h) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d * h;
}

PairSeries run_coupled_pair(const Problem& problem, const ScalarFn& rho0_a, const ScalarFn& rho0_b,
                            std::uint64_t seed, std::uint32_t member, const RunOptions& options) {
  const Integrator integrator(problem);
  const BrownianStream stream(seed, member, problem.noise.K());
  const double h = problem.grid.h();

  PairSeries out;
  FieldState a = integrator.init(rho0_a), b = integrator.init(rho0_b);
  check_fixed_dt(integrator, problem, a);
  check_fixed_dt(integrator, problem, b);
  double sup = l1_distance(a.rho, b.rho, h);
  out.t.push_back(0.0);
  out.distance.push_back(sup);
  out.running_sup.push_back(sup);

  Clock clock(problem.cfg.T, options.snapshot_every);
  std::vector<double> dW(problem.noise.K());
  while (!clock.done(a.t)) {
    double dt = problem.cfg.dt ? *problem.cfg.dt
                               : std::min(integrator.cfl_dt(a), integrator.cfl_dt(b));
    dt = clock.trim(a.t, dt);
    draw(stream, a.step_index, dt, options.aggregate, dW);
    if (options.observer) options.observer(a, dt, dW);
    integrator.step(a, dt, dW, &stream);
    integrator.step(b, dt, dW, &stream);
    const double d = l1_distance(a.rho, b.rho, h);
    sup = std::max(sup, d);
    if (clock.landed(a.t)) {
      b.t = a.t;
      out.t.push_back(a.t);
      out.distance.push_back(d);
      out.running_sup.push_back(sup);
    }
  }
  out.a = std::move(a);
  out.b = std::move(b);
  return out;
}

std::size_t default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace dk

#include <algorithm>
#include <cmath>

#include "dk/error.hpp"
#include "dk/solver.hpp"

namespace dk {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::ito_euler: return "ito_euler";
    case Scheme::stratonovich_heun: return "stratonovich_heun";
    case Scheme::galerkin_spectral: return "galerkin_spectral";
  }
  return "?";
}

const char* to_string(Positivity p) { return p == Positivity::clip ? "clip" : "reject_step"; }

const char* to_string(BoundaryMode b) {
  return b == BoundaryMode::dirichlet ? "dirichlet" : "periodic";
}

double mass(const FieldState& state, const Grid& grid) {
  double s = 0.0;
  for (double r : state.rho) s += r;
  return s * grid.h();
}

double min_value(const FieldState& state) {
  return state.rho.empty() ? 0.0 : *std::min_element(state.rho.begin(), state.rho.end());
}

FieldState make_state(const Grid& grid, const ScalarFn& profile, double alpha) {
  FieldState s;
  s.alpha = alpha;
  const auto c = grid.centers();
  s.rho.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) s.rho[i] = profile(c[i]);
  return s;
}

FVStepper::FVStepper(const Grid& grid, const CoefficientSet& coeffs, const NoiseModel& noise,
                     const SolverConfig& cfg)
    : grid_(grid), coeffs_(coeffs), noise_(noise), cfg_(cfg) {
  if (grid.dimension() != 1) throw InvalidArgument("the SPDE is solved on the interval only");
  if (noise.F1.size() != grid.size()) throw InvalidArgument("noise model built on another grid");
  if (!(cfg.alpha >= 0.0)) throw InvalidArgument("alpha must be non-negative");
  if (cfg.fbar.left < 0.0 || cfg.fbar.right < 0.0)
    throw InvalidArgument("boundary data must be non-negative");
  rho_l_ = coeffs.phi_inverse(cfg.fbar.left);
  rho_r_ = coeffs.phi_inverse(cfg.fbar.right);
  const std::size_t n = grid.size();
  D_.resize(n);
  J_.resize(n + 1);
  S_.resize(n + 1);
  J2_.resize(n + 1);
  S2_.resize(n + 1);
  work_.resize(n);
  root_.resize(n);
  slope_.resize(n);
  // Face correlations sum_k f_k(x_f) f_k(x_{f -/+ 1}); periodic faces wrap.
  const int K = noise.K();
  const bool periodic = cfg.boundary == BoundaryMode::periodic;
  corr_prev_.assign(n + 1, 0.0);
  corr_next_.assign(n + 1, 0.0);
  for (std::size_t f = 0; f <= n; ++f) {
    const bool has_prev = f > 0 || periodic, has_next = f < n || periodic;
    const std::size_t prev = f > 0 ? f - 1 : n - 1, next = f < n ? f + 1 : 1;
    for (int k = 0; k < K; ++k) {
      const double* row = noise.f_face.data() + k * (n + 1);
      if (has_prev) corr_prev_[f] += row[f] * row[prev];
      if (has_next) corr_next_[f] += row[f] * row[next];
    }
  }
}

double FVStepper::cfl_dt(const FieldState& state, double theta) const {
  const std::size_t n = grid_.size();
  const bool periodic = cfg_.boundary == BoundaryMode::periodic;
  auto D = [&](double r, double F1) {
    r = std::max(r, 0.0);
    double d = coeffs_.phi_prime(r) + cfg_.alpha;
    if (F1 != 0.0) {
      const double sp = coeffs_.sigma_prime(r);
      d += 0.5 * F1 * sp * sp;
    }
    return d;
  };
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = D(state.rho[i], noise_.F1[i]);
    if (!std::isfinite(d)) throw NumericalError("non-finite diffusivity in CFL bound", state.step_index);
    dmax = std::max(dmax, d);
  }
  if (!periodic) {
    const double dl = D(rho_l_, noise_.F1_face.front()), dr = D(rho_r_, noise_.F1_face.back());
    if (!std::isfinite(dl) || !std::isfinite(dr))
      throw NumericalError("non-finite diffusivity in CFL bound", state.step_index);
    dmax = std::max({dmax, dl, dr});
  }
  if (dmax <= 0.0) return cfg_.dt_max;
  const double h = grid_.h();
  return std::min(cfg_.dt_max, theta * h * h / (2.0 * dmax));
}

void FVStepper::fluxes(std::span<const double> rho, std::span<const double> dW, bool ito,
                       std::vector<double>& J, std::vector<double>& S) const {
  const std::size_t n = grid_.size();
  const double h = grid_.h();
  const double alpha = cfg_.alpha;
  const int K = noise_.K();
  const bool periodic = cfg_.boundary == BoundaryMode::periodic;
  const auto& cs = coeffs_;

  for (std::size_t i = 0; i < n; ++i) D_[i] = cs.phi_prime(std::max(rho[i], 0.0)) + alpha;
  if (K > 0)
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::max(rho[i], 0.0);
      root_[i] = std::sqrt(std::max(cs.sigma(r), 0.0));
      slope_[i] = cs.sigma_prime(r);
    }
  const double sl = K > 0 ? cs.sigma(rho_l_) : 0.0, sr = K > 0 ? cs.sigma(rho_r_) : 0.0;

  // Interior faces carry the noise coefficient sqrt(sigma_L sigma_R), so no
  // noise flux crosses a face next to an empty cell. The Ito drift is the
  // exact Ito-Stratonovich conversion of that discrete noise:
  //   G_f = -(1/4h) [sigma'_L r_R (r_R C_f - q_L C^-_f) + sigma'_R r_L (q_R C^+_f - r_L C_f)]
  // with r = sigma^{1/2}, q the outer neighbours' r and C the face correlations.
  auto outer_left = [&](std::size_t L) {
    if (L > 0) return root_[L - 1];
    if (periodic) return root_[n - 1];
    return root_[0] > 0.0 ? sl / root_[0] : 0.0;
  };
  auto outer_right = [&](std::size_t R) {
    if (R + 1 < n) return root_[R + 1];
    if (periodic) return root_[0];
    return root_[n - 1] > 0.0 ? sr / root_[n - 1] : 0.0;
  };

  auto face = [&](std::size_t f, std::size_t L, std::size_t R, double rl, double rr, double Dl,
                  double Dr, double dist, bool interior) {
    const double rf = 0.5 * (rl + rr);
    double j = 0.5 * (Dl + Dr) * (rr - rl) / dist;
    if (cs.nu) j -= cs.nu(rf);
    double sigma_f = 0.0;
    if (K > 0) {
      sigma_f = interior ? root_[L] * root_[R] : cs.sigma(rf);
      if (ito && interior) {
        const double C = noise_.F1_face[f], Cm = corr_prev_[f], Cp = corr_next_[f];
        const double rL = root_[L], rR = root_[R];
        const double G = -(slope_[L] * rR * (rR * C - outer_left(L) * Cm) +
                           slope_[R] * rL * (outer_right(R) * Cp - rL * C)) / (4.0 * h);
        j -= G;
      }
    }
    J[f] = j;
    double s = 0.0;
    if (K > 0) {
      double xi = 0.0;
      for (int k = 0; k < K; ++k) xi += noise_.f_face[k * (n + 1) + f] * dW[k];
      s = sigma_f * xi;
    }
    S[f] = s;
  };

  for (std::size_t f = 1; f < n; ++f) {
    const double rl = std::max(rho[f - 1], 0.0), rr = std::max(rho[f], 0.0);
    face(f, f - 1, f, rl, rr, D_[f - 1], D_[f], h, true);
  }
  if (periodic) {
    const double rl = std::max(rho[n - 1], 0.0), rr = std::max(rho[0], 0.0);
    face(0, n - 1, 0, rl, rr, D_[n - 1], D_[0], h, true);
    J[n] = J[0];
    S[n] = S[0];
  } else {
    // The boundary value sits on the end face, half a cell from the centre.
    const double Dl = cs.phi_prime(rho_l_) + alpha, Dr = cs.phi_prime(rho_r_) + alpha;
    face(0, 0, 0, rho_l_, std::max(rho[0], 0.0), Dl, D_[0], 0.5 * h, false);
    face(n, n - 1, n - 1, std::max(rho[n - 1], 0.0), rho_r_, D_[n - 1], Dr, 0.5 * h, false);
    // The end faces sit at the boundary value itself.
    if (K > 0) {
      double xl = 0.0, xr = 0.0;
      for (int k = 0; k < K; ++k) {
        xl += noise_.f_face[k * (n + 1)] * dW[k];
        xr += noise_.f_face[k * (n + 1) + n] * dW[k];
      }
      S[0] = sl * xl;
      S[n] = sr * xr;
    }
  }
}

double FVStepper::raw_step(std::vector<double>& rho, double dt, std::span<const double> dW,
                           Scheme scheme) const {
  const std::size_t n = grid_.size();
  const double h = grid_.h();
  if (dW.size() != static_cast<std::size_t>(noise_.K()))
    throw InvalidArgument("increment count must equal the mode count");
  switch (scheme) {
    case Scheme::ito_euler: {
      fluxes(rho, dW, true, J_, S_);
      for (std::size_t i = 0; i < n; ++i)
        rho[i] += (dt * (J_[i + 1] - J_[i]) - (S_[i + 1] - S_[i])) / h;
      break;
    }
    case Scheme::stratonovich_heun: {
      fluxes(rho, dW, false, J_, S_);
      for (std::size_t i = 0; i < n; ++i)
        work_[i] = rho[i] + (dt * (J_[i + 1] - J_[i]) - (S_[i + 1] - S_[i])) / h;
      if (noise_.K() > 0) {
        fluxes(work_, dW, false, J2_, S2_);
        for (std::size_t i = 0; i < n; ++i)
          rho[i] += (dt * (J_[i + 1] - J_[i]) -
                     0.5 * (S_[i + 1] - S_[i] + S2_[i + 1] - S2_[i])) / h;
      } else {
        rho.swap(work_);
      }
      break;
    }
    case Scheme::galerkin_spectral:
      throw InvalidArgument("the finite-volume stepper does not run the spectral scheme");
  }
  return cfg_.boundary == BoundaryMode::periodic ? 0.0 : dt * (J_[n] - J_[0]);
}

void FVStepper::advance(FieldState& state, double dt, std::span<const double> dW,
                        const BrownianStream* stream, int depth, std::uint32_t node) const {
  std::vector<double> trial = state.rho;
  const double inflow = raw_step(trial, dt, dW, cfg_.scheme);
  for (double r : trial)
    if (!std::isfinite(r)) throw NumericalError("non-finite density after step", state.step_index);

  const bool negative = std::any_of(trial.begin(), trial.end(), [](double r) { return r < 0.0; });
  if (negative && cfg_.positivity == Positivity::reject_step && stream &&
      depth < std::min(cfg_.max_bisections, 15)) {
    // Split the step at its Brownian midpoint and retry both halves.
    const int K = noise_.K();
    std::vector<double> first(K), second(K);
    for (int k = 0; k < K; ++k) {
      first[k] = 0.5 * dW[k] +
                 std::sqrt(0.25 * dt) * stream->bridge_normal(state.step_index, k, depth + 1, node);
      second[k] = dW[k] - first[k];
    }
    state.bisections += 2;
    advance(state, 0.5 * dt, first, stream, depth + 1, 2 * node);
    advance(state, 0.5 * dt, second, stream, depth + 1, 2 * node + 1);
    return;
  }
  if (negative) {
    const double h = grid_.h();
    for (double& r : trial)
      if (r < 0.0) {
        state.clip_ledger += -r * h;
        r = 0.0;
      }
  }
  state.rho.swap(trial);
  state.boundary_inflow += inflow;
}

void FVStepper::step(FieldState& state, double dt, std::span<const double> dW,
                     const BrownianStream* stream) const {
  if (state.rho.size() != grid_.size()) throw InvalidArgument("state does not match the grid");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  advance(state, dt, dW, stream, 0, 0);
  state.t += dt;
  ++state.step_index;
}

double cfl_dt(const FieldState& state, const Grid& grid, const SolverConfig& cfg,
              const CoefficientSet& coeffs, const NoiseModel& noise) {
  return FVStepper(grid, coeffs, noise, cfg).cfl_dt(state);
}

void step_ito(FieldState& state, double dt, const Grid& grid, const SolverConfig& cfg,
              const CoefficientSet& coeffs, const NoiseModel& noise, std::span<const double> dW) {
  SolverConfig c = cfg;
  c.scheme = Scheme::ito_euler;
  FVStepper(grid, coeffs, noise, c).step(state, dt, dW);
}

void step_stratonovich_heun(FieldState& state, double dt, const Grid& grid,
                            const SolverConfig& cfg, const CoefficientSet& coeffs,
                            const NoiseModel& noise, std::span<const double> dW) {
  SolverConfig c = cfg;
  c.scheme = Scheme::stratonovich_heun;
  FVStepper(grid, coeffs, noise, c).step(state, dt, dW);
}

}  // namespace dk

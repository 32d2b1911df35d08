#include <algorithm>
#include <cmath>
#include <numbers>

#include "dk/error.hpp"
#include "dk/solver.hpp"

namespace dk {

GalerkinStepper::GalerkinStepper(const Grid& grid, const CoefficientSet& coeffs,
                                 const NoiseModel& noise, const SolverConfig& cfg)
    : grid_(grid), coeffs_(coeffs), noise_(noise), cfg_(cfg),
      periodic_(cfg.boundary == BoundaryMode::periodic) {
  if (grid.dimension() != 1) throw InvalidArgument("the SPDE is solved on the interval only");
  if (noise.F1.size() != grid.size()) throw InvalidArgument("noise model built on another grid");
  if (cfg.fbar.left < 0.0 || cfg.fbar.right < 0.0)
    throw InvalidArgument("boundary data must be non-negative");
  const int n = grid.n();
  L_ = grid.extent();
  h_ = grid.h();
  const double pi = std::numbers::pi;
  const int K = noise.K();

  const int n_nodes = periodic_ ? n : n + 1;
  x_.resize(n_nodes);
  w_.assign(n_nodes, 1.0);
  for (int i = 0; i < n_nodes; ++i) x_[i] = i * h_;
  if (!periodic_) w_.front() = w_.back() = 0.5;

  // Mode list: wavenumber and parity (sin = +, cos = -) of each basis function.
  std::vector<std::pair<double, bool>> basis;
  if (periodic_) {
    const int jmax = (n - 1) / 2;
    const int J = cfg.galerkin_modes == 0 ? jmax : cfg.galerkin_modes;
    if (J < 1 || J > jmax) throw InvalidArgument("Galerkin mode count exceeds the grid Nyquist limit");
    basis.emplace_back(0.0, false);
    for (int j = 1; j <= J; ++j) {
      basis.emplace_back(2.0 * pi * j / L_, false);
      basis.emplace_back(2.0 * pi * j / L_, true);
    }
  } else {
    const int M = cfg.galerkin_modes == 0 ? n - 1 : cfg.galerkin_modes;
    if (M < 1 || M > n - 1) throw InvalidArgument("Galerkin mode count exceeds the grid Nyquist limit");
    for (int j = 1; j <= M; ++j) basis.emplace_back(pi * j / L_, true);
    g_l_ = coeffs.phi_inverse(cfg.fbar.left);
    g_r_ = coeffs.phi_inverse(cfg.fbar.right);
  }
  M_ = static_cast<int>(basis.size());

  const auto centers = grid.centers();
  E_.resize(static_cast<std::size_t>(M_) * n_nodes);
  dE_.resize(E_.size());
  Ec_.resize(static_cast<std::size_t>(M_) * n);
  wavenumber_.resize(M_);
  for (int j = 0; j < M_; ++j) {
    const auto [w, is_sin] = basis[j];
    const double a = w == 0.0 ? 1.0 / std::sqrt(L_) : std::sqrt(2.0 / L_);
    wavenumber_[j] = w;
    for (int i = 0; i < n_nodes; ++i) {
      const double s = std::sin(w * x_[i]), c = std::cos(w * x_[i]);
      E_[j * n_nodes + i] = a * (is_sin ? s : c);
      dE_[j * n_nodes + i] = a * w * (is_sin ? c : -s);
    }
    for (int i = 0; i < n; ++i)
      Ec_[j * n + i] = a * (is_sin ? std::sin(w * centers[i]) : std::cos(w * centers[i]));
  }

  // Nodes coincide with the grid faces.
  F1n_.assign(noise.F1_face.begin(), noise.F1_face.begin() + n_nodes);
  F2n_.assign(noise.F2_face.begin(), noise.F2_face.begin() + n_nodes);
  fn_.resize(static_cast<std::size_t>(K) * n_nodes);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < n_nodes; ++i) fn_[k * n_nodes + i] = noise.f_face[k * (n + 1) + i];
}

double GalerkinStepper::lift(double x) const {
  return periodic_ ? 0.0 : g_l_ + (g_r_ - g_l_) * x / L_;
}

double GalerkinStepper::lift_slope() const { return periodic_ ? 0.0 : (g_r_ - g_l_) / L_; }

std::vector<double> GalerkinStepper::project_nodes(std::span<const double> values) const {
  const std::size_t N = x_.size();
  if (values.size() != N) throw InvalidArgument("projection needs one value per node");
  std::vector<double> c(M_, 0.0);
  for (int j = 0; j < M_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += w_[i] * (values[i] - lift(x_[i])) * E_[j * N + i];
    c[j] = s * h_;
  }
  return c;
}

std::vector<double> GalerkinStepper::reconstruct_nodes(std::span<const double> modal) const {
  const std::size_t N = x_.size();
  std::vector<double> u(N);
  for (std::size_t i = 0; i < N; ++i) u[i] = lift(x_[i]);
  for (int j = 0; j < M_; ++j)
    for (std::size_t i = 0; i < N; ++i) u[i] += modal[j] * E_[j * N + i];
  return u;
}

double GalerkinStepper::evaluate(std::span<const double> modal, double x) const {
  double u = lift(x);
  for (int j = 0; j < M_; ++j) {
    const double w = wavenumber_[j];
    const bool is_sin = !periodic_ || (j > 0 && j % 2 == 0);
    const double a = w == 0.0 ? 1.0 / std::sqrt(L_) : std::sqrt(2.0 / L_);
    u += modal[j] * a * (is_sin ? std::sin(w * x) : std::cos(w * x));
  }
  return u;
}

void GalerkinStepper::load(FieldState& state, const ScalarFn& profile) const {
  std::vector<double> v(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) v[i] = profile(x_[i]);
  if (!periodic_) {
    v.front() = g_l_;
    v.back() = g_r_;
  }
  state.modal = project_nodes(v);
  const std::size_t n = grid_.size();
  const auto centers = grid_.centers();
  state.rho.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) state.rho[i] = lift(centers[i]);
  for (int j = 0; j < M_; ++j)
    for (std::size_t i = 0; i < n; ++i) state.rho[i] += state.modal[j] * Ec_[j * n + i];
}

double GalerkinStepper::cfl_dt(const FieldState& state, double theta) const {
  const auto u = reconstruct_nodes(state.modal);
  double dmax = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = std::max(u[i], 0.0);
    double d = coeffs_.phi_prime(r) + cfg_.alpha;
    if (F1n_[i] != 0.0) d += 0.5 * F1n_[i] * std::pow(coeffs_.sigma_prime(r), 2);
    if (!std::isfinite(d)) throw NumericalError("non-finite diffusivity in CFL bound", state.step_index);
    dmax = std::max(dmax, d);
  }
  const double kmax = *std::max_element(wavenumber_.begin(), wavenumber_.end());
  if (dmax <= 0.0 || kmax == 0.0) return cfg_.dt_max;
  return std::min(cfg_.dt_max, theta * 2.0 / (dmax * kmax * kmax));
}

void GalerkinStepper::step(FieldState& state, double dt, std::span<const double> dW) const {
  if (static_cast<int>(state.modal.size()) != M_)
    throw InvalidArgument("state carries no modal coefficients for this basis");
  if (dW.size() != static_cast<std::size_t>(noise_.K()))
    throw InvalidArgument("increment count must equal the mode count");
  const std::size_t N = x_.size();
  const int K = noise_.K();
  auto& c = state.modal;

  std::vector<double> u(N), du(N, lift_slope());
  for (std::size_t i = 0; i < N; ++i) u[i] = lift(x_[i]);
  for (int j = 0; j < M_; ++j)
    for (std::size_t i = 0; i < N; ++i) {
      u[i] += c[j] * E_[j * N + i];
      du[i] += c[j] * dE_[j * N + i];
    }

  // Weighted flux at the nodes: dt J - S.
  std::vector<double> flux(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double r = std::max(u[i], 0.0);
    double D = coeffs_.phi_prime(r) + cfg_.alpha;
    double J = 0.0;
    if (F1n_[i] != 0.0 || F2n_[i] != 0.0) {
      const double sp = coeffs_.sigma_prime(r);
      D += 0.5 * F1n_[i] * sp * sp;
      if (F2n_[i] != 0.0) J += 0.5 * coeffs_.sigma(r) * sp * F2n_[i];
    }
    J += D * du[i];
    if (coeffs_.nu) J -= coeffs_.nu(r);
    double xi = 0.0;
    for (int k = 0; k < K; ++k) xi += fn_[k * N + i] * dW[k];
    const double S = xi != 0.0 ? coeffs_.sigma(r) * xi : 0.0;
    flux[i] = w_[i] * h_ * (dt * J - S);
  }
  for (int j = 0; j < M_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += flux[i] * dE_[j * N + i];
    c[j] -= s;
  }
  for (double v : c)
    if (!std::isfinite(v)) throw NumericalError("non-finite modal coefficient", state.step_index);

  const std::size_t n = grid_.size();
  const auto centers = grid_.centers();
  for (std::size_t i = 0; i < n; ++i) state.rho[i] = lift(centers[i]);
  for (int j = 0; j < M_; ++j)
    for (std::size_t i = 0; i < n; ++i) state.rho[i] += c[j] * Ec_[j * n + i];
  state.t += dt;
  ++state.step_index;
}

}  // namespace dk

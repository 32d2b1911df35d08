#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dk/coefficients.hpp"
#include "dk/domain.hpp"
#include "dk/noise.hpp"
#include "dk/rng.hpp"

namespace dk {

enum class Scheme { ito_euler, stratonovich_heun, galerkin_spectral };
enum class Positivity { clip, reject_step };
enum class BoundaryMode { dirichlet, periodic };

const char* to_string(Scheme s);
const char* to_string(Positivity p);
const char* to_string(BoundaryMode b);

struct SolverConfig {
  double alpha = 0.0;
  std::optional<double> dt;  // fixed step; otherwise cfl_theta * stability limit
  double cfl_theta = 0.5;
  double dt_max = 1e-2;
  Scheme scheme = Scheme::ito_euler;
  Positivity positivity = Positivity::clip;
  double T = 1.0;
  BoundaryMode boundary = BoundaryMode::dirichlet;
  BoundaryData fbar{};
  int galerkin_modes = 0;     // 0: largest admissible
  int max_bisections = 6;     // reject_step depth before falling back to clipping
};

/// Solution at one instant. `rho` lives on cell centres for every scheme;
/// the spectral scheme additionally keeps its modal coefficients.
struct FieldState {
  std::vector<double> rho;
  double t = 0.0;
  double alpha = 0.0;
  std::uint64_t step_index = 0;
  double clip_ledger = 0.0;      // mass added by clipping, cumulative
  double boundary_inflow = 0.0;  // mass entered through the boundary, cumulative
  std::uint64_t bisections = 0;  // reject_step sub-steps taken
  std::vector<double> modal;
};

double mass(const FieldState& state, const Grid& grid);
double min_value(const FieldState& state);

/// Conservative finite-volume stepper for the Ito form and the Stratonovich
/// form of the regularised equation on the interval.
///
/// Face flux J = D grad(rho) - nu with D = phi'(rho) + alpha, stochastic face
/// flux S = sigma_face sum_k f_k(x_face) dW_k, and
///   rho_i += dt (J_{i+1} - J_i) / h - (S_{i+1} - S_i) / h.
/// In Ito form J also carries the Ito-Stratonovich drift of the discrete noise,
/// a conservative discretisation of (1/2)(F1 sigma'^2 grad rho + sigma sigma' F2).
/// Dirichlet data sit on the end faces as Phi^{-1}(fbar).
class FVStepper {
 public:
  FVStepper(const Grid& grid, const CoefficientSet& coeffs, const NoiseModel& noise,
            const SolverConfig& cfg);

  /// theta h^2 / (2 max D), capped by dt_max.
  double cfl_dt(const FieldState& state, double theta) const;
  double cfl_dt(const FieldState& state) const { return cfl_dt(state, cfg_.cfl_theta); }

  /// One step with positivity handling. `stream` feeds Brownian-bridge
  /// refinements in reject_step mode; without it the step falls back to clipping.
  void step(FieldState& state, double dt, std::span<const double> dW,
            const BrownianStream* stream = nullptr) const;

  /// Raw increment of one scheme without positivity handling; returns boundary inflow.
  double raw_step(std::vector<double>& rho, double dt, std::span<const double> dW,
                  Scheme scheme) const;

  const Grid& grid() const noexcept { return grid_; }
  const SolverConfig& config() const noexcept { return cfg_; }
  double rho_left() const noexcept { return rho_l_; }
  double rho_right() const noexcept { return rho_r_; }

 private:
  // Face fluxes of state rho: J (drift) and S (noise, already multiplied by dW).
  void fluxes(std::span<const double> rho, std::span<const double> dW, bool ito,
              std::vector<double>& J, std::vector<double>& S) const;
  void advance(FieldState& state, double dt, std::span<const double> dW,
               const BrownianStream* stream, int depth, std::uint32_t node) const;

  const Grid& grid_;
  const CoefficientSet& coeffs_;
  const NoiseModel& noise_;
  SolverConfig cfg_;
  double rho_l_ = 0.0, rho_r_ = 0.0;
  std::vector<double> corr_prev_, corr_next_;
  mutable std::vector<double> D_, J_, S_, J2_, S2_, work_, root_, slope_;
};

/// Spectral Galerkin scheme (Euler-Maruyama in modal coefficients).
///
/// Dirichlet: u = rho - g in the basis sqrt(2/L) sin(j pi x / L), j = 1..M,
/// with M <= n - 1, collocated on the n + 1 nodes x_i = i h.
/// Periodic: rho in the real Fourier basis with 2J + 1 modes, J < n / 2,
/// collocated on the n nodes x_i = i h.
class GalerkinStepper {
 public:
  GalerkinStepper(const Grid& grid, const CoefficientSet& coeffs, const NoiseModel& noise,
                  const SolverConfig& cfg);

  int modes() const noexcept { return M_; }
  std::span<const double> nodes() const noexcept { return x_; }

  /// Modal coefficients of a profile sampled at the nodes.
  std::vector<double> project_nodes(std::span<const double> values_at_nodes) const;
  /// Values of the modal expansion (plus lift) at the nodes or at arbitrary points.
  std::vector<double> reconstruct_nodes(std::span<const double> modal) const;
  double evaluate(std::span<const double> modal, double x) const;

  /// Initialises state.modal from a profile and fills state.rho at the cell centres.
  void load(FieldState& state, const ScalarFn& profile) const;

  double cfl_dt(const FieldState& state, double theta) const;
  double cfl_dt(const FieldState& state) const { return cfl_dt(state, cfg_.cfl_theta); }
  void step(FieldState& state, double dt, std::span<const double> dW) const;

 private:
  double lift(double x) const;
  double lift_slope() const;

  const Grid& grid_;
  const CoefficientSet& coeffs_;
  const NoiseModel& noise_;
  SolverConfig cfg_;
  bool periodic_;
  int M_ = 0;
  double L_ = 1.0, h_ = 1.0;
  double g_l_ = 0.0, g_r_ = 0.0;
  std::vector<double> x_, w_;
  std::vector<double> E_, dE_, Ec_;  // basis at nodes, derivative at nodes, basis at centres
  std::vector<double> F1n_, F2n_, fn_;
  std::vector<double> wavenumber_;
};

// Free-function forms of single operations; each builds a transient stepper.
double cfl_dt(const FieldState& state, const Grid& grid, const SolverConfig& cfg,
              const CoefficientSet& coeffs, const NoiseModel& noise);
void step_ito(FieldState& state, double dt, const Grid& grid, const SolverConfig& cfg,
              const CoefficientSet& coeffs, const NoiseModel& noise, std::span<const double> dW);
void step_stratonovich_heun(FieldState& state, double dt, const Grid& grid,
                            const SolverConfig& cfg, const CoefficientSet& coeffs,
                            const NoiseModel& noise, std::span<const double> dW);

FieldState make_state(const Grid& grid, const ScalarFn& profile, double alpha = 0.0);

}  // namespace dk

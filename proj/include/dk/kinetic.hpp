#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "dk/coefficients.hpp"
#include "dk/domain.hpp"
#include "dk/noise.hpp"
#include "dk/runner.hpp"

namespace dk {

// ---------------------------------------------------------------------------
// Kinetic function

/// chi(x_i, xi_j) = 1 iff 0 <= xi_j <= rho(x_i); stored cell-major.
struct KineticTable {
  std::vector<double> levels;
  std::size_t cells = 0;
  std::vector<std::uint8_t> chi;

  bool at(std::size_t cell, std::size_t level) const { return chi[cell * levels.size() + level]; }
};

KineticTable kinetic_function(std::span<const double> rho, std::span<const double> xi_levels);
KineticTable kinetic_function(const FieldState& state, std::span<const double> xi_levels);

/// Midpoint levels (j + 1/2) d_xi covering [0, xi_max].
std::vector<double> midpoint_levels(double xi_max, double d_xi);

/// Gradient used by the kinetic diagnostics: centred in the interior,
/// one-sided toward the interior on the two boundary-adjacent cells.
std::vector<double> cell_gradient(std::span<const double> rho, double h);

// ---------------------------------------------------------------------------
// Kinetic measure q = delta(xi - rho) (phi'(rho) + alpha) |grad rho|^2

enum class BandKind { dyadic, unit, custom };

struct Band {
  double lo = 0.0, hi = 0.0;  // half-open [lo, hi)
  BandKind kind = BandKind::custom;
};

struct KineticHistogram {
  std::vector<Band> bands;
  std::vector<double> window_edges;  // time windows [edges[w], edges[w+1])
  std::vector<double> mass;          // bands x windows
  bool strided = false;              // built from snapshots sparser than the steps

  std::size_t windows() const { return window_edges.empty() ? 0 : window_edges.size() - 1; }
  double& at(std::size_t band, std::size_t window) { return mass[band * windows() + window]; }
  double at(std::size_t band, std::size_t window) const { return mass[band * windows() + window]; }
  double band_total(std::size_t band) const;

  KineticHistogram& operator+=(const KineticHistogram& other);
  void scale(double factor);
};

/// Dyadic bands [2^{-j-1}, 2^{-j}) for j = 0..dyadic_levels-1 and unit bands
/// [M, M+1) for M = 0..unit_levels-1, over the given time windows.
KineticHistogram make_histogram(int dyadic_levels, int unit_levels,
                                std::vector<double> window_edges);
KineticHistogram make_histogram(std::vector<Band> bands, std::vector<double> window_edges);

/// Adds the contribution of one state held over [t, t + dt).
void accumulate_step(KineticHistogram& hist, std::span<const double> rho, double t, double dt,
                     double h, const CoefficientSet& coeffs, double alpha);

/// Left-point accumulation over consecutive snapshots of a trajectory.
void accumulate_kinetic_measure(KineticHistogram& hist, const Trajectory& traj, const Grid& grid,
                                const CoefficientSet& coeffs, double alpha);

/// Observer adding every step of a run to `hist`.
StepObserver kinetic_observer(KineticHistogram& hist, const Grid& grid,
                              const CoefficientSet& coeffs, double alpha);

/// (beta, beta^{-1} q[beta/2, beta)) over the dyadic bands, all windows summed.
std::vector<std::pair<double, double>> decay_at_zero(const KineticHistogram& hist);
/// (M, q[M, M+1)) over the unit bands, all windows summed.
std::vector<std::pair<double, double>> vanish_at_infinity(const KineticHistogram& hist);

void write_csv(std::ostream& out, const KineticHistogram& hist);

// ---------------------------------------------------------------------------
// Cutoffs and test functions

/// 0 on [0, beta/2], 1 on [beta, inf), linear in between.
double phi_beta(double xi, double beta);
/// 1 on [0, M], 0 on [M+1, inf), linear in between.
double zeta_M(double xi, double M);
/// Smooth step: 0 on [0, beta/2], 1 on [beta, inf).
double smooth_step(double xi, double beta);
/// Phi_beta(xi) = smooth_step(xi, beta) * xi.
double Phi_beta(double xi, double beta);
/// Standard mollifier of scale eps, supported in (-eps, eps), unit integral.
double mollifier(double x, double eps);

struct CutoffBundle {
  double beta = 0.5, M = 1.0, eps = 0.1, delta = 0.1;

  double phi(double xi) const { return phi_beta(xi, beta); }
  double zeta(double xi) const { return zeta_M(xi, M); }
  double kappa_eps(double x) const { return mollifier(x, eps); }
  double kappa_delta(double xi) const { return mollifier(xi, delta); }
  double Phi(double xi) const { return Phi_beta(xi, beta); }
};

/// C^2 bump (1 - s^2)^3 on |s| < 1 and its derivatives.
double bump(double s);
double bump_prime(double s);
double bump_integral(double s);  // integral from -1 to s

/// psi(x, xi) = amplitude * bump((x - cx)/rx) * bump((xi - cxi)/rxi).
struct TestFunction {
  double cx = 0.5, rx = 0.25;
  double cxi = 1.0, rxi = 0.5;
  double amplitude = 1.0;

  double operator()(double x, double xi) const;
  double dx(double x, double xi) const;
  double dxi(double x, double xi) const;
  /// integral_0^rho psi(x, xi) d xi
  double xi_integral(double x, double rho) const;
  /// Support inside (0, L) x (0, inf).
  bool compactly_supported(double L) const;
};

// ---------------------------------------------------------------------------
// Kinetic equation residual

struct KineticResidual {
  double chi_t = 0.0;        // int int chi(t) psi
  double chi_0 = 0.0;        // int int chi(0) psi
  double flux = 0.0;         // parabolic and drift flux against grad_x psi
  double measure = 0.0;      // q against d_xi psi
  double ito = 0.0;          // F2 / F3 correction terms
  double martingale = 0.0;   // psi(x, rho) div(sigma d xi^F)
  double drift = 0.0;        // psi(x, rho) div nu
  double residual = 0.0;
};

/// Streams the terms of the regularised kinetic equation over a run.
/// Time-boundary terms use the kinetic-function table on levels of spacing d_xi.
class KineticResidualAccumulator {
 public:
  KineticResidualAccumulator(const Grid& grid, const CoefficientSet& coeffs,
                             const NoiseModel& noise, double alpha, const TestFunction& psi,
                             BoundaryData fbar, double d_xi);

  void begin(const FieldState& initial);
  void observe(const FieldState& state, double dt, std::span<const double> dW);
  KineticResidual finish(const FieldState& final_state) const;
  StepObserver observer();

 private:
  double chi_integral(std::span<const double> rho) const;

  const Grid& grid_;
  const CoefficientSet& coeffs_;
  const NoiseModel& noise_;
  double alpha_;
  TestFunction psi_;
  double rho_l_, rho_r_;
  double d_xi_;
  KineticResidual acc_;
};

/// Residual from a trajectory recorded with one snapshot per step and its increments.
KineticResidual kinetic_equation_residual(const Trajectory& traj, const TestFunction& psi,
                                          const Grid& grid, const CoefficientSet& coeffs,
                                          const NoiseModel& noise, double alpha,
                                          BoundaryData fbar, double d_xi);

struct IbpCheck {
  double lhs = 0.0, rhs = 0.0, discrepancy = 0.0;
};

/// int int grad_x psi chi dx dxi against -int psi(x, rho) grad rho dx.
IbpCheck integration_by_parts_check(std::span<const double> rho, const Grid& grid,
                                    const TestFunction& psi, double d_xi);

}  // namespace dk

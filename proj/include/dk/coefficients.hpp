#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dk/quadrature.hpp"

namespace dk {

enum class SigmaKind { sqrt, phi_sqrt, zero };

/// The nonlinearity triple (Phi, sigma, nu) with derivatives and the
/// antiderivatives consumed by the estimates. All handles are pure.
struct CoefficientSet {
  ScalarFn phi, phi_prime, phi_inverse;
  ScalarFn sigma, sigma_prime;
  ScalarFn nu, nu_prime;
  double m = 1.0;  // declared polynomial growth exponent of phi

  ScalarFn theta_phi;    // theta(0) = 0, theta' = sqrt(phi')
  ScalarFn theta_nu;     // theta(0) = 0, theta' = nu
  ScalarFn theta_sigma;  // theta(1) = 0, theta' = sigma sigma' / xi
  // integral_1^xi (sigma')^2. The noise-bound Psi_sigma(x, xi) is F1(x) times this.
  ScalarFn sigma_prime_sq_integral;
  ScalarFn log_phi_integral;  // integral_0^xi log(phi)

  std::optional<int> smoothing_n;
  std::string description;

  /// Psi_sigma at a point where the noise intensity F1 takes the given value.
  double psi_sigma(double F1, double xi) const;
};

// S(0) = 0, S'' = 1/xi on [0, 1]: S'(xi) = log(min(xi, 1)).
double S(double xi);
double S_prime(double xi);
// S_M'' = 1 on (M1, M2), S_M(0) = S_M'(0) = 0.
double S_M(double xi, double M1, double M2);
double S_M_prime(double xi, double M1, double M2);

/// Phi(xi) = xi^m with sigma = sqrt(xi) or sigma = Phi^{1/2}; nu(xi) = nu_c * xi.
CoefficientSet make_model_case(double m, SigmaKind sigma_kind, double nu_c = 0.0);

struct CustomCoefficients {
  ScalarFn phi, phi_prime;
  ScalarFn sigma, sigma_prime;
  ScalarFn nu, nu_prime;  // empty => zero
  double m = 1.0;
  std::string description = "custom";
};

/// Generic coefficients; antiderivatives by adaptive quadrature, Phi^{-1} by bisection.
CoefficientSet make_coefficients(CustomCoefficients c);

/// Piecewise-linear interpolant through (xi, value) pairs, linearly extrapolated.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> points;
  double operator()(double xi) const;
  double slope(double xi) const;
};

/// Replaces sigma by a C^1 approximation sigma_n: quadratic on [0, 1/n]
/// matching value and slope at 1/n with sigma_n(0) = 0, equal to sigma on
/// [1/n, n], and flattening to a constant on [n, n + 1].
CoefficientSet smooth_sigma(const CoefficientSet& set, int n);

}  // namespace dk

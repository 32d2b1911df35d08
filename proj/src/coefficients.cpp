#include "dk/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dk/error.hpp"

namespace dk {
namespace {

// x^p with the cheap integer cases spelled out; the steppers call these per cell.
ScalarFn power_fn(double p) {
  if (p == 0.0) return [](double) { return 1.0; };
  if (p == 1.0) return [](double x) { return x; };
  if (p == 2.0) return [](double x) { return x * x; };
  if (p == 0.5) return [](double x) { return std::sqrt(x); };
  return [p](double x) { return std::pow(x, p); };
}

ScalarFn scaled(double c, ScalarFn f) {
  if (c == 1.0) return f;
  return [c, f = std::move(f)](double x) { return c * f(x); };
}

ScalarFn zero_fn() {
  return [](double) { return 0.0; };
}

}  // namespace

double CoefficientSet::psi_sigma(double F1, double xi) const {
  if (F1 == 0.0) return 0.0;
  return F1 * sigma_prime_sq_integral(xi);
}

double S(double xi) {
  const double y = std::min(xi, 1.0);
  if (y <= 0.0) return 0.0;
  return y * std::log(y) - y;
}

double S_prime(double xi) { return std::log(std::min(xi, 1.0)); }

double S_M_prime(double xi, double M1, double M2) {
  return std::clamp(xi - M1, 0.0, M2 - M1);
}

double S_M(double xi, double M1, double M2) {
  if (xi <= M1) return 0.0;
  if (xi <= M2) return 0.5 * (xi - M1) * (xi - M1);
  return 0.5 * (M2 - M1) * (M2 - M1) + (M2 - M1) * (xi - M2);
}

CoefficientSet make_model_case(double m, SigmaKind sigma_kind, double nu_c) {
  if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("model exponent m must be positive");
  CoefficientSet c;
  c.m = m;
  c.phi = power_fn(m);
  c.phi_prime = scaled(m, power_fn(m - 1.0));
  c.phi_inverse = power_fn(1.0 / m);
  c.theta_phi = scaled(2.0 * std::sqrt(m) / (m + 1.0), power_fn(0.5 * (m + 1.0)));
  c.log_phi_integral = [m](double x) { return x > 0.0 ? m * (x * std::log(x) - x) : 0.0; };

  std::ostringstream desc;
  desc << "phi=xi^" << m;
  switch (sigma_kind) {
    case SigmaKind::sqrt:
      c.sigma = power_fn(0.5);
      c.sigma_prime = [](double x) { return 0.5 / std::sqrt(x); };
      c.theta_sigma = [](double x) { return 0.5 * std::log(x); };
      c.sigma_prime_sq_integral = [](double x) { return 0.25 * std::log(x); };
      desc << ", sigma=sqrt(xi)";
      break;
    case SigmaKind::phi_sqrt: {
      const double e = 0.5 * m;
      c.sigma = power_fn(e);
      c.sigma_prime = scaled(e, power_fn(e - 1.0));
      if (m == 1.0) {
        c.theta_sigma = [](double x) { return 0.5 * std::log(x); };
        c.sigma_prime_sq_integral = [](double x) { return 0.25 * std::log(x); };
      } else {
        c.theta_sigma = [m](double x) { return 0.5 * m * (std::pow(x, m - 1.0) - 1.0) / (m - 1.0); };
        c.sigma_prime_sq_integral = [m](double x) {
          return 0.25 * m * m * (std::pow(x, m - 1.0) - 1.0) / (m - 1.0);
        };
      }
      desc << ", sigma=xi^" << e;
      break;
    }
    case SigmaKind::zero:
      c.sigma = zero_fn();
      c.sigma_prime = zero_fn();
      c.theta_sigma = zero_fn();
      c.sigma_prime_sq_integral = zero_fn();
      desc << ", sigma=0";
      break;
  }
  if (nu_c == 0.0) {
    c.nu = zero_fn();
    c.nu_prime = zero_fn();
    c.theta_nu = zero_fn();
  } else {
    c.nu = [nu_c](double x) { return nu_c * x; };
    c.nu_prime = [nu_c](double) { return nu_c; };
    c.theta_nu = [nu_c](double x) { return 0.5 * nu_c * x * x; };
    desc << ", nu=" << nu_c << "*xi";
  }
  c.description = desc.str();
  return c;
}

CoefficientSet make_coefficients(CustomCoefficients in) {
  if (!in.phi || !in.phi_prime || !in.sigma || !in.sigma_prime)
    throw InvalidArgument("custom coefficients need phi, phi', sigma and sigma'");
  if (!in.nu) in.nu = zero_fn();
  if (!in.nu_prime) in.nu_prime = zero_fn();

  CoefficientSet c;
  c.m = in.m;
  c.description = in.description;
  c.phi = in.phi;
  c.phi_prime = in.phi_prime;
  c.sigma = in.sigma;
  c.sigma_prime = in.sigma_prime;
  c.nu = in.nu;
  c.nu_prime = in.nu_prime;

  c.phi_inverse = [phi = in.phi](double y) { return invert_increasing(phi, y); };
  c.theta_phi = [dphi = in.phi_prime](double x) {
    return integrate([&](double e) { return std::sqrt(dphi(e)); }, 0.0, x);
  };
  c.theta_nu = [nu = in.nu](double x) { return integrate(nu, 0.0, x); };
  c.log_phi_integral = [phi = in.phi](double x) {
    return integrate([&](double e) { return std::log(phi(e)); }, 0.0, x);
  };
  c.theta_sigma = [s = in.sigma, ds = in.sigma_prime](double x) {
    return integrate([&](double e) { return s(e) * ds(e) / e; }, 1.0, x);
  };
  c.sigma_prime_sq_integral = [ds = in.sigma_prime](double x) {
    return integrate([&](double e) { return ds(e) * ds(e); }, 1.0, x);
  };
  return c;
}

double PiecewiseLinear::operator()(double xi) const {
  if (points.size() < 2) throw InvalidArgument("table needs at least two points");
  auto it = std::upper_bound(points.begin(), points.end(), xi,
                             [](double v, const auto& p) { return v < p.first; });
  std::size_t hi = std::clamp<std::size_t>(it - points.begin(), 1, points.size() - 1);
  const auto& [x0, y0] = points[hi - 1];
  const auto& [x1, y1] = points[hi];
  return y0 + (y1 - y0) * (xi - x0) / (x1 - x0);
}

double PiecewiseLinear::slope(double xi) const {
  if (points.size() < 2) throw InvalidArgument("table needs at least two points");
  auto it = std::upper_bound(points.begin(), points.end(), xi,
                             [](double v, const auto& p) { return v < p.first; });
  std::size_t hi = std::clamp<std::size_t>(it - points.begin(), 1, points.size() - 1);
  const auto& [x0, y0] = points[hi - 1];
  const auto& [x1, y1] = points[hi];
  return (y1 - y0) / (x1 - x0);
}

CoefficientSet smooth_sigma(const CoefficientSet& set, int n) {
  if (n < 1) throw InvalidArgument("smoothing level n must be >= 1");
  const double lo = 1.0 / n, cap = static_cast<double>(n);
  const double s_lo = set.sigma(lo), d_lo = set.sigma_prime(lo);
  // q(xi) = a xi + b xi^2 with q(lo) = s_lo, q'(lo) = d_lo.
  const double a = 2.0 * n * s_lo - d_lo;
  const double b = n * (d_lo - n * s_lo);
  const double s_cap = set.sigma(cap), d_cap = set.sigma_prime(cap);

  CustomCoefficients c;
  c.phi = set.phi;
  c.phi_prime = set.phi_prime;
  c.nu = set.nu;
  c.nu_prime = set.nu_prime;
  c.m = set.m;
  c.sigma = [=, sigma = set.sigma](double x) {
    if (x <= 0.0) return 0.0;
    if (x < lo) return a * x + b * x * x;
    if (x <= cap) return sigma(x);
    const double u = std::min(x - cap, 1.0);
    return s_cap + d_cap * (u - 0.5 * u * u);
  };
  c.sigma_prime = [=, dsigma = set.sigma_prime](double x) {
    if (x < lo) return a + 2.0 * b * std::max(x, 0.0);
    if (x <= cap) return dsigma(x);
    return d_cap * std::max(0.0, 1.0 - (x - cap));
  };

  CoefficientSet out = make_coefficients(c);
  // Phi-derived handles are unchanged; keep closed forms where the input had them.
  out.phi_inverse = set.phi_inverse;
  out.theta_phi = set.theta_phi;
  out.theta_nu = set.theta_nu;
  out.log_phi_integral = set.log_phi_integral;
  out.smoothing_n = n;
  out.description = set.description + ", smoothed n=" + std::to_string(n);
  return out;
}

}  // namespace dk

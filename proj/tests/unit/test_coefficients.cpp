#include <cmath>

#include "doctest.h"
#include "dk/assumptions.hpp"
#include "dk/coefficients.hpp"
#include "dk/error.hpp"
#include "dk/quadrature.hpp"
#include "gen.hpp"

using namespace dk;

namespace {

double fd(const ScalarFn& f, double x) {
  const double e = 1e-6 * std::max(1.0, x);
  return (f(x + e) - f(x - e)) / (2.0 * e);
}

}  // namespace

TEST_CASE("model case closed forms") {
  const CoefficientSet c = make_model_case(2.0, SigmaKind::sqrt);
  CHECK(c.phi(3.0) == doctest::Approx(9.0));
  CHECK(c.phi_prime(3.0) == doctest::Approx(6.0));
  CHECK(c.phi_inverse(4.0) == doctest::Approx(2.0));
  CHECK(c.sigma(4.0) == doctest::Approx(2.0));
  // Theta_Phi(xi) = (2 sqrt(2) / 3) xi^{3/2}
  CHECK(c.theta_phi(2.0) == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0 * std::pow(2.0, 1.5)));
  CHECK(c.theta_sigma(1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(make_model_case(0.0, SigmaKind::sqrt), InvalidArgument);
}

TEST_CASE("property: model-case derivatives and antiderivatives agree with finite differences") {
  Gen gen(2);
  for (int c = 0; c < kCases; ++c) {
    const double m = gen.uniform(1.0, 3.0);
    const auto kind = gen.integer(0, 1) ? SigmaKind::sqrt : SigmaKind::phi_sqrt;
    const CoefficientSet cs = make_model_case(m, kind, gen.uniform(0.0, 1.0));
    const double x = gen.uniform(0.1, 4.0);
    CHECK(fd(cs.phi, x) == doctest::Approx(cs.phi_prime(x)).epsilon(1e-5));
    CHECK(fd(cs.sigma, x) == doctest::Approx(cs.sigma_prime(x)).epsilon(1e-5));
    CHECK(fd(cs.nu, x) == doctest::Approx(cs.nu_prime(x)).epsilon(1e-5).scale(1.0));
    CHECK(fd(cs.theta_phi, x) == doctest::Approx(std::sqrt(cs.phi_prime(x))).epsilon(1e-5));
    CHECK(fd(cs.theta_nu, x) == doctest::Approx(cs.nu(x)).epsilon(1e-5).scale(1.0));
    CHECK(fd(cs.theta_sigma, x) == doctest::Approx(cs.sigma(x) * cs.sigma_prime(x) / x).epsilon(1e-5));
    const double sp = cs.sigma_prime(x);
    CHECK(fd(cs.sigma_prime_sq_integral, x) == doctest::Approx(sp * sp).epsilon(1e-5));
    CHECK(cs.phi_inverse(cs.phi(x)) == doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("property: log-phi integral matches quadrature") {
  Gen gen(3);
  for (int c = 0; c < 40; ++c) {
    const double m = gen.uniform(1.0, 3.0);
    const CoefficientSet cs = make_model_case(m, SigmaKind::sqrt);
    const double x = gen.uniform(0.05, 3.0);
    const double q = integrate([&](double s) { return m * std::log(s); }, 0.0, x, 1e-11);
    CHECK(cs.log_phi_integral(x) == doctest::Approx(q).epsilon(1e-7));
  }
}

TEST_CASE("generic coefficients reproduce the model case") {
  CustomCoefficients in;
  in.phi = [](double x) { return x * x; };
  in.phi_prime = [](double x) { return 2.0 * x; };
  in.sigma = [](double x) { return std::sqrt(std::max(x, 0.0)); };
  in.sigma_prime = [](double x) { return 0.5 / std::sqrt(x); };
  in.m = 2.0;
  const CoefficientSet g = make_coefficients(in);
  const CoefficientSet m = make_model_case(2.0, SigmaKind::sqrt);
  for (double x : {0.2, 0.7, 1.0, 2.5}) {
    CHECK(g.theta_phi(x) == doctest::Approx(m.theta_phi(x)).epsilon(1e-7));
    CHECK(g.phi_inverse(g.phi(x)) == doctest::Approx(x).epsilon(1e-8));
    CHECK(g.theta_sigma(x) == doctest::Approx(m.theta_sigma(x)).epsilon(1e-7));
    CHECK(g.log_phi_integral(x) == doctest::Approx(m.log_phi_integral(x)).epsilon(1e-6));
  }
}

TEST_CASE("smoothed sigma is C1 with sigma_n(0) = 0") {
  const CoefficientSet base = make_model_case(1.0, SigmaKind::sqrt);
  for (int n : {2, 4, 8}) {
    const CoefficientSet s = smooth_sigma(base, n);
    CHECK(s.sigma(0.0) == 0.0);
    CHECK(std::isfinite(s.sigma_prime(0.0)));
    const double a = 1.0 / n, e = 1e-9;
    CHECK(s.sigma(a - e) == doctest::Approx(s.sigma(a + e)).epsilon(1e-7));
    CHECK(s.sigma_prime(a - e) == doctest::Approx(s.sigma_prime(a + e)).epsilon(1e-6));
    CHECK(s.sigma(0.5 * (a + n)) == doctest::Approx(base.sigma(0.5 * (a + n))));
    CHECK(s.sigma_prime(n + 1.5) == doctest::Approx(0.0).scale(1.0));
    CHECK(s.sigma(n + 2.0) == doctest::Approx(s.sigma(n + 1.0)));
  }
  CHECK_THROWS_AS(smooth_sigma(base, 0), InvalidArgument);
}

TEST_CASE("S and S_M") {
  CHECK(S(0.0) == 0.0);
  CHECK(S_prime(0.5) == doctest::Approx(std::log(0.5)));
  CHECK(S_prime(3.0) == doctest::Approx(0.0));
  CHECK(S_M(0.25, 0.5, 2.0) == 0.0);
  CHECK(S_M_prime(1.0, 0.5, 2.0) == doctest::Approx(0.5));
  CHECK(S_M_prime(3.0, 0.5, 2.0) == doctest::Approx(1.5));
}

TEST_CASE("piecewise-linear table") {
  PiecewiseLinear p{{{0.0, 0.0}, {1.0, 2.0}, {2.0, 3.0}}};
  CHECK(p(0.5) == doctest::Approx(1.0));
  CHECK(p(1.5) == doctest::Approx(2.5));
  CHECK(p(3.0) == doctest::Approx(4.0));
  CHECK(p.slope(0.5) == doctest::Approx(2.0));
}

TEST_CASE("assumption validators on the model case") {
  const CoefficientSet c = make_model_case(2.0, SigmaKind::sqrt);
  const auto xi = log_grid(1e-3, 10.0);
  const AssumptionReport u = validate_uniqueness_assumptions(c, xi);
  CHECK_FALSE(u.items.empty());
  for (const auto& item : u.items) CHECK(std::isfinite(item.constant));
}

TEST_CASE("quadrature and inversion") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0));
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-9) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(invert_increasing([](double x) { return x * x * x; }, 27.0) == doctest::Approx(3.0));
}

#include "dk/quadrature.hpp"

#include <cmath>

#include "dk/error.hpp"

namespace dk {
namespace {

struct Simpson {
  const ScalarFn& f;
  int evaluations = 0;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    evaluations += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  double run(double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return recurse(a, b, fa, fm, fb, whole, tol, 48);
  }
};

double simpson(const ScalarFn& f, double a, double b, double tol) {
  // Split once so that a smooth integrand never fools the first comparison.
  Simpson s{f};
  const double m = 0.5 * (a + b);
  return s.run(a, m, 0.5 * tol) + s.run(m, b, 0.5 * tol);
}

}  // namespace

double integrate(const ScalarFn& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, tol);
  const bool bad_a = !std::isfinite(f(a));
  const bool bad_b = !std::isfinite(f(b));
  const double L = b - a;
  if (!bad_a && !bad_b) return simpson(f, a, b, tol);
  if (bad_a && bad_b) {
    const double m = 0.5 * (a + b);
    return integrate(f, a, m, 0.5 * tol) + integrate(f, m, b, 0.5 * tol);
  }
  // x = a + L t^2 (or b - L t^2): dx = 2 L t dt removes power-law endpoint blow-up.
  const double sign = bad_a ? 1.0 : -1.0;
  const double origin = bad_a ? a : b;
  ScalarFn g = [&](double t) {
    if (t == 0.0) return 0.0;
    const double v = f(origin + sign * L * t * t) * 2.0 * L * t;
    return std::isfinite(v) ? v : 0.0;
  };
  return simpson(g, 0.0, 1.0, tol);
}

double invert_increasing(const ScalarFn& f, double y, double hint) {
  if (!std::isfinite(y)) throw InvalidArgument("cannot invert a non-finite value");
  if (y <= f(0.0)) return 0.0;
  double lo = 0.0, hi = hint > 0.0 ? hint : 1.0;
  int guard = 0;
  while (f(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 2000) throw NumericalError("inverse bracket search diverged");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dk

#pragma once

#include <functional>

namespace dk {

using ScalarFn = std::function<double(double)>;

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
/// Integrable singularities at either endpoint are handled by a quadratic
/// change of variables that clusters nodes at the singular end.
double integrate(const ScalarFn& f, double a, double b, double tol = 1e-10);

/// Solves f(x) = y for increasing f on [0, inf) by bracketing and bisection.
double invert_increasing(const ScalarFn& f, double y, double hint = 1.0);

}  // namespace dk

#include "dk/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dk/error.hpp"

namespace dk {
namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

// Tridiagonal solve, a: sub, b: diag, c: super. Overwrites d with the solution.
void thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c,
            std::vector<double>& d) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

HarmonicField solve_1d(const Grid& grid, double left, double right) {
  check_finite(left, "boundary data");
  check_finite(right, "boundary data");
  const std::size_t n = grid.size();
  const double h = grid.h();
  // Faces carry the data; the boundary cell sees it at distance h/2.
  std::vector<double> a(n, 1.0), b(n, -2.0), c(n, 1.0), u(n, 0.0);
  b[0] = -3.0;
  b[n - 1] = -3.0;
  u[0] = -2.0 * left;
  u[n - 1] = -2.0 * right;
  thomas(a, b, c, u);

  HarmonicField f;
  f.dimension = 1;
  f.shape = {static_cast<int>(n), 1};
  f.boundary_data = {left, right};
  for (std::size_t i = 0; i < n; ++i) {
    const double ul = i == 0 ? left : u[i - 1];
    const double ur = i + 1 == n ? right : u[i + 1];
    const double wl = i == 0 ? 2.0 : 1.0, wr = i + 1 == n ? 2.0 : 1.0;
    const double lap = (wl * (ul - u[i]) + wr * (ur - u[i])) / (h * h);
    f.residual = std::max(f.residual, std::abs(lap));
  }
  // Second-order one-sided derivative through (0, h/2, 3h/2).
  const double dl = (-8.0 * left + 9.0 * u[0] - u[1]) / (3.0 * h);
  const double dr = (8.0 * right - 9.0 * u[n - 1] + u[n - 2]) / (3.0 * h);
  f.normal_derivative = {-dl, dr};
  f.values = std::move(u);
  return f;
}

HarmonicField solve_2d(const Grid& grid, const BoundaryFn& data, const LaplaceOptions& opt) {
  const int nx = grid.n(0) + 1, ny = grid.n(1) + 1;
  const double hx = grid.h(0), hy = grid.h(1);
  auto id = [nx](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };

  HarmonicField f;
  f.dimension = 2;
  f.shape = {nx, ny};
  f.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  auto& u = f.values;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
        const double v = data(i * hx, j * hy);
        check_finite(v, "boundary data");
        u[id(i, j)] = v;
      }

  const double cx = 1.0 / (hx * hx), cy = 1.0 / (hy * hy), cd = 2.0 * (cx + cy);
  const double hmax = std::max(hx, hy);
  const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi * hmax));
  auto laplacian = [&](int i, int j) {
    const double c = u[id(i, j)];
    return cx * (u[id(i - 1, j)] + u[id(i + 1, j)] - 2.0 * c) +
           cy * (u[id(i, j - 1)] + u[id(i, j + 1)] - 2.0 * c);
  };
  auto max_residual = [&] {
    double r = 0.0;
    for (int j = 1; j < ny - 1; ++j)
      for (int i = 1; i < nx - 1; ++i) r = std::max(r, std::abs(laplacian(i, j)));
    return r;
  };

  // The unscaled residual cannot drop below round-off in the stencil, about eps * |u| * cd.
  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::abs(v));
  const double target =
      std::max(opt.tolerance, 16.0 * std::numeric_limits<double>::epsilon() * umax * cd);
  f.residual = max_residual();
  while (f.residual > target) {
    if (f.sweeps >= opt.max_sweeps)
      throw NumericalError("SOR did not reach tolerance", static_cast<std::size_t>(f.sweeps));
    for (int colour = 0; colour < 2; ++colour)
      for (int j = 1; j < ny - 1; ++j)
        for (int i = 1 + (j + colour) % 2; i < nx - 1; i += 2)
          u[id(i, j)] += omega * laplacian(i, j) / cd;
    ++f.sweeps;
    if (f.sweeps % 10 == 0) f.residual = max_residual();
  }

  // Edges: x = 0, x = Lx, y = 0, y = Ly; outward one-sided second-order stencils.
  auto edge = [&](int count, auto&& node, double h) {
    for (int s = 0; s < count; ++s) {
      const double u0 = u[node(s, 0)], u1 = u[node(s, 1)], u2 = u[node(s, 2)];
      f.boundary_data.push_back(u0);
      f.normal_derivative.push_back(-(-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h));
    }
  };
  edge(ny, [&](int s, int k) { return id(k, s); }, hx);
  edge(ny, [&](int s, int k) { return id(nx - 1 - k, s); }, hx);
  edge(nx, [&](int s, int k) { return id(s, k); }, hy);
  edge(nx, [&](int s, int k) { return id(s, ny - 1 - k); }, hy);
  return f;
}

}  // namespace

HarmonicField solve_dirichlet_laplace(const Grid& grid, const BoundaryData& data) {
  if (grid.dimension() != 1) throw InvalidArgument("two-point boundary data needs a 1D grid");
  return solve_1d(grid, data.left, data.right);
}

HarmonicField solve_dirichlet_laplace(const Grid& grid, const BoundaryFn& data,
                                      const LaplaceOptions& options) {
  if (grid.dimension() == 1) return solve_1d(grid, data(0.0, 0.0), data(grid.extent(), 0.0));
  return solve_2d(grid, data, options);
}

HarmonicField lift_g(const Grid& grid, const CoefficientSet& coeffs, const BoundaryData& fbar) {
  if (fbar.left < 0.0 || fbar.right < 0.0) throw InvalidArgument("boundary data must be non-negative");
  return solve_dirichlet_laplace(
      grid, BoundaryData{coeffs.phi_inverse(fbar.left), coeffs.phi_inverse(fbar.right)});
}

HarmonicField lift_hM(const Grid& grid, const CoefficientSet& coeffs, const BoundaryData& fbar,
                      double M1, double M2) {
  if (!(0.0 < M1 && M1 < M2)) throw InvalidArgument("h_M needs 0 < M1 < M2");
  if (fbar.left < 0.0 || fbar.right < 0.0) throw InvalidArgument("boundary data must be non-negative");
  return solve_dirichlet_laplace(
      grid, BoundaryData{S_M_prime(coeffs.phi_inverse(fbar.left), M1, M2),
                         S_M_prime(coeffs.phi_inverse(fbar.right), M1, M2)});
}

HarmonicField lift_v(const Grid& grid, const CoefficientSet& coeffs, const BoundaryData& fbar,
                     double delta, VKind kind) {
  if (delta < 0.0) throw InvalidArgument("delta must be non-negative");
  auto datum = [&](double f) {
    if (kind == VKind::log_shift) {
      if (!(f + delta > 0.0)) throw InvalidArgument("log of non-positive boundary data");
      return std::log(f + delta);
    }
    const double g = coeffs.phi_inverse(f);
    if (!(g > 0.0)) throw InvalidArgument("log of non-positive boundary data");
    return S_prime(g);
  };
  return solve_dirichlet_laplace(grid, BoundaryData{datum(fbar.left), datum(fbar.right)});
}

double dirichlet_energy(const Grid& grid, const HarmonicField& field) {
  if (field.dimension != 1) throw InvalidArgument("dirichlet_energy is 1D only");
  const double h = grid.h();
  const auto& u = field.values;
  const std::size_t n = u.size();
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) e += (u[i + 1] - u[i]) * (u[i + 1] - u[i]) / h;
  const double l = u[0] - field.boundary_data[0], r = field.boundary_data[1] - u[n - 1];
  e += 2.0 * (l * l + r * r) / h;
  return e;
}

double boundary_flux(const HarmonicField& field) {
  double s = 0.0;
  for (std::size_t i = 0; i < field.boundary_data.size(); ++i)
    s += field.boundary_data[i] * field.normal_derivative[i];
  return s;
}

}  // namespace dk

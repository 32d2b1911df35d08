#pragma once

#include <array>
#include <functional>
#include <vector>

#include "dk/coefficients.hpp"
#include "dk/domain.hpp"

namespace dk {

/// Discrete harmonic function with its Dirichlet data.
///
/// 1D: `values` at the cell centres, data imposed at the two end faces;
/// `boundary_data` and `normal_derivative` are {left, right}.
///
/// 2D: node-based. A grid of n0 x n1 cells carries (n0+1) x (n1+1) nodes,
/// stored row-major with x fastest. Boundary entries are listed edge by edge
/// (x = 0, x = Lx, y = 0, y = Ly), each edge including its two corners.
struct HarmonicField {
  int dimension = 1;
  std::array<int, 2> shape{0, 1};
  std::vector<double> values;
  std::vector<double> boundary_data;
  std::vector<double> normal_derivative;  // outward
  double residual = 0.0;
  int sweeps = 0;
};

using BoundaryFn = std::function<double(double x, double y)>;

struct LaplaceOptions {
  double tolerance = 1e-10;  // floored at the round-off level of the stencil
  int max_sweeps = 100000;
};

HarmonicField solve_dirichlet_laplace(const Grid& grid, const BoundaryData& data);
HarmonicField solve_dirichlet_laplace(const Grid& grid, const BoundaryFn& data,
                                      const LaplaceOptions& options = {});

/// g: harmonic with data Phi^{-1}(fbar).
HarmonicField lift_g(const Grid& grid, const CoefficientSet& coeffs, const BoundaryData& fbar);

/// h_M: harmonic with data S_M'(Phi^{-1}(fbar)).
HarmonicField lift_hM(const Grid& grid, const CoefficientSet& coeffs, const BoundaryData& fbar,
                      double M1, double M2);

enum class VKind {
  log_shift,  // v_delta: data log(fbar + delta)
  entropy,    // v: data S'(Phi^{-1}(fbar)) = log(min(Phi^{-1}(fbar), 1))
};

HarmonicField lift_v(const Grid& grid, const CoefficientSet& coeffs, const BoundaryData& fbar,
                     double delta, VKind kind = VKind::log_shift);

/// Discrete Dirichlet energy of a 1D field, including the two half cells at the boundary.
double dirichlet_energy(const Grid& grid, const HarmonicField& field);

/// Boundary sum of u du/d(eta) for a 1D field.
double boundary_flux(const HarmonicField& field);

}  // namespace dk

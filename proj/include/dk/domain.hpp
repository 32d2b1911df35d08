#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace dk {

struct DomainSpec {
  int dimension = 1;                 // 1 for SPDE runs, 1 or 2 for harmonic solves
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> n_cells{64, 1};
};

// A boundary-adjacent cell seen from one side of the domain. Corner cells of a
// rectangle appear once per touching edge.
struct BoundaryCell {
  std::size_t index;
  int axis;
  int side;  // -1: low edge, +1: high edge
};

/// Centers of n uniform cells on [0, extent]. No size validation.
std::vector<double> uniform_centers(double extent, int n);

/// Uniform cell-centred grid on an interval or rectangle anchored at the origin.
class Grid {
 public:
  explicit Grid(const DomainSpec& spec);

  int dimension() const noexcept { return spec_.dimension; }
  const DomainSpec& spec() const noexcept { return spec_; }
  int n(int axis = 0) const { return spec_.n_cells[axis]; }
  double extent(int axis = 0) const { return spec_.extent[axis]; }
  double h(int axis = 0) const { return h_[axis]; }
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept;
  double volume() const noexcept;

  std::span<const double> centers(int axis = 0) const { return centers_[axis]; }
  std::span<const double> faces(int axis = 0) const { return faces_[axis]; }
  const std::vector<BoundaryCell>& boundary_cells() const noexcept { return boundary_; }

  std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(j) * n(0) + i; }

  /// Euclidean distance to the boundary; throws for exterior points.
  double distance_to_boundary(std::span<const double> x) const;
  double distance_to_boundary(double x) const;

 private:
  DomainSpec spec_;
  std::array<double, 2> h_{};
  std::size_t size_ = 0;
  std::array<std::vector<double>, 2> centers_;
  std::array<std::vector<double>, 2> faces_;
  std::vector<BoundaryCell> boundary_;
};

Grid build_grid(const DomainSpec& spec);

/// Piecewise-linear spatial cutoff min(d(x), gamma)/gamma sampled at cell centres.
struct BoundaryCutoff {
  double gamma = 0.0;
  std::vector<double> values;
  std::vector<std::array<double, 2>> gradient;
};

BoundaryCutoff iota_gamma(const Grid& grid, double gamma);

/// Boundary data fbar of the interval problem: Phi(rho) = fbar at x = 0 and x = L.
struct BoundaryData {
  double left = 0.0;
  double right = 0.0;
  bool constant() const noexcept { return left == right; }
};

}  // namespace dk

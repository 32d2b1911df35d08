#include "dk/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dk/error.hpp"

namespace dk {

std::vector<double> uniform_centers(double extent, int n) {
  std::vector<double> c(static_cast<std::size_t>(std::max(n, 0)));
  const double h = extent / n;
  for (int i = 0; i < n; ++i) c[i] = (i + 0.5) * h;
  return c;
}

Grid::Grid(const DomainSpec& spec) : spec_(spec) {
  if (spec.dimension != 1 && spec.dimension != 2)
    throw InvalidArgument("grid dimension must be 1 or 2, got " + std::to_string(spec.dimension));
  size_ = 1;
  for (int a = 0; a < spec.dimension; ++a) {
    if (spec.n_cells[a] < 8)
      throw InvalidArgument("grid needs at least 8 cells per axis, got " +
                            std::to_string(spec.n_cells[a]));
    if (!(spec.extent[a] > 0.0) || !std::isfinite(spec.extent[a]))
      throw InvalidArgument("grid extent must be positive and finite");
    h_[a] = spec.extent[a] / spec.n_cells[a];
    centers_[a] = uniform_centers(spec.extent[a], spec.n_cells[a]);
    faces_[a].resize(spec.n_cells[a] + 1);
    for (int i = 0; i <= spec.n_cells[a]; ++i) faces_[a][i] = i * h_[a];
    size_ *= static_cast<std::size_t>(spec.n_cells[a]);
  }
  if (spec.dimension == 1) {
    spec_.n_cells[1] = 1;
    boundary_.push_back({0, 0, -1});
    boundary_.push_back({static_cast<std::size_t>(n(0) - 1), 0, +1});
    return;
  }
  const int nx = n(0), ny = n(1);
  for (int i = 0; i < nx; ++i) {
    boundary_.push_back({index(i, 0), 1, -1});
    boundary_.push_back({index(i, ny - 1), 1, +1});
  }
  for (int j = 0; j < ny; ++j) {
    boundary_.push_back({index(0, j), 0, -1});
    boundary_.push_back({index(nx - 1, j), 0, +1});
  }
}

double Grid::cell_volume() const noexcept {
  return spec_.dimension == 1 ? h_[0] : h_[0] * h_[1];
}

double Grid::volume() const noexcept {
  return spec_.dimension == 1 ? spec_.extent[0] : spec_.extent[0] * spec_.extent[1];
}

double Grid::distance_to_boundary(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(spec_.dimension))
    throw InvalidArgument("point dimension does not match grid");
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < spec_.dimension; ++a) {
    const double lo = x[a], hi = spec_.extent[a] - x[a];
    if (lo < 0.0 || hi < 0.0) throw InvalidArgument("point lies outside the domain");
    d = std::min({d, lo, hi});
  }
  return d;
}

double Grid::distance_to_boundary(double x) const {
  const double p[1] = {x};
  return distance_to_boundary(std::span<const double>(p, 1));
}

Grid build_grid(const DomainSpec& spec) { return Grid(spec); }

BoundaryCutoff iota_gamma(const Grid& grid, double gamma) {
  double half_width = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.dimension(); ++a) half_width = std::min(half_width, 0.5 * grid.extent(a));
  if (!(gamma > 0.0) || !(gamma < half_width))
    throw InvalidArgument("cutoff width gamma must lie in (0, half the domain width)");

  const int dim = grid.dimension();
  auto iota = [gamma](double d) { return std::min(std::max(d, 0.0), gamma) / gamma; };

  BoundaryCutoff out;
  out.gamma = gamma;
  out.values.resize(grid.size());
  out.gradient.assign(grid.size(), {0.0, 0.0});
  const int ny = dim == 2 ? grid.n(1) : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < grid.n(0); ++i) {
      std::array<double, 2> x{grid.centers(0)[i], dim == 2 ? grid.centers(1)[j] : 0.0};
      const double d = grid.distance_to_boundary(std::span<const double>(x.data(), dim));
      const std::size_t c = grid.index(i, j);
      out.values[c] = iota(d);
      if (d >= gamma) continue;
      // Inward normal of the nearest edge (first axis wins at ties).
      int axis = 0;
      double sign = 1.0, best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < dim; ++a) {
        if (x[a] < best) { best = x[a]; axis = a; sign = 1.0; }
        if (grid.extent(a) - x[a] < best) { best = grid.extent(a) - x[a]; axis = a; sign = -1.0; }
      }
      // One-sided difference toward the interior.
      const double step = grid.h(axis);
      out.gradient[c][axis] = sign * (iota(d + step) - iota(d)) / step;
    }
  }
  return out;
}

}  // namespace dk

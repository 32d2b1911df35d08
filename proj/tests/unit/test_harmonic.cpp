#include <cmath>

#include "doctest.h"
#include "dk/error.hpp"
#include "dk/harmonic.hpp"
#include "gen.hpp"

using namespace dk;

namespace {
Grid line(int n) {
  DomainSpec s;
  s.n_cells = {n, 1};
  return build_grid(s);
}
Grid square(int n) {
  DomainSpec s;
  s.dimension = 2;
  s.n_cells = {n, n};
  return build_grid(s);
}
}  // namespace

TEST_CASE("property: 1D harmonic fields are the linear interpolant") {
  Gen gen(5);
  for (int c = 0; c < 50; ++c) {
    const Grid g = line(gen.integer(8, 300));
    const double a = gen.uniform(-5.0, 5.0), b = gen.uniform(-5.0, 5.0);
    const HarmonicField f = solve_dirichlet_laplace(g, BoundaryData{a, b});
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(f.values[i] == doctest::Approx(a + (b - a) * g.centers()[i]).epsilon(1e-12).scale(1.0));
    CHECK(f.normal_derivative[0] == doctest::Approx(a - b));
    CHECK(f.normal_derivative[1] == doctest::Approx(b - a));
  }
}

TEST_CASE("2D solve reproduces a bilinear harmonic polynomial") {
  const auto u = [](double x, double y) { return 1.0 + 2.0 * x - y + 3.0 * x * y; };
  const HarmonicField f = solve_dirichlet_laplace(square(16), u);
  CHECK(f.values.size() == 17u * 17u);
  for (int j = 0; j <= 16; ++j)
    for (int i = 0; i <= 16; ++i) CHECK(f.values[j * 17 + i] == doctest::Approx(u(i / 16.0, j / 16.0)).epsilon(1e-8));
}

TEST_CASE("lifts carry the transformed boundary data") {
  const CoefficientSet c = make_model_case(2.0, SigmaKind::sqrt);
  const Grid g = line(32);
  const HarmonicField gl = lift_g(g, c, BoundaryData{1.0, 4.0});
  CHECK(gl.boundary_data[0] == doctest::Approx(1.0));
  CHECK(gl.boundary_data[1] == doctest::Approx(2.0));
  const HarmonicField v = lift_v(g, c, BoundaryData{1.0, 4.0}, 0.5);
  CHECK(v.boundary_data[1] == doctest::Approx(std::log(4.5)));
  CHECK_THROWS_AS(lift_g(g, c, BoundaryData{-1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(lift_hM(g, c, BoundaryData{1.0, 1.0}, 2.0, 1.0), InvalidArgument);
}

TEST_CASE("Dirichlet energy of a linear field") {
  const Grid g = line(64);
  const HarmonicField f = solve_dirichlet_laplace(g, BoundaryData{0.0, 2.0});
  CHECK(dirichlet_energy(g, f) == doctest::Approx(4.0));
  CHECK(boundary_flux(f) == doctest::Approx(4.0));
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dk/noise.hpp"
#include "dk/rng.hpp"
#include "gen.hpp"

using namespace dk;

namespace {
Grid line(int n, double L = 1.0) {
  DomainSpec s;
  s.extent = {L, 1.0};
  s.n_cells = {n, 1};
  return build_grid(s);
}
}  // namespace

TEST_CASE("property: noise fields match their defining sums") {
  Gen gen(4);
  for (int c = 0; c < 30; ++c) {
    const double L = gen.uniform(0.5, 2.0);
    const Grid g = line(gen.integer(8, 64), L);
    const int K = gen.integer(1, 8);
    const double p = gen.uniform(0.5, 3.0), scale = gen.uniform(0.1, 2.0);
    const NoiseModel nm(g, K, p, scale);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.centers()[i];
      double F1 = 0.0, F2 = 0.0, F3 = 0.0;
      for (int k = 1; k <= K; ++k) {
        const double a = scale * std::pow(k, -p), w = k * std::numbers::pi / L;
        const double f = a * std::sin(w * x), df = a * w * std::cos(w * x);
        F1 += f * f;
        F2 += f * df;
        F3 += df * df;
      }
      CHECK(nm.F1[i] == doctest::Approx(F1).scale(1.0));
      CHECK(nm.F2[i] == doctest::Approx(F2).scale(1.0));
      CHECK(nm.F3[i] == doctest::Approx(F3).scale(1.0));
      CHECK(nm.F2[i] * nm.F2[i] <= nm.F1[i] * nm.F3[i] * (1.0 + 1e-12) + 1e-300);
    }
    CHECK(nm.F1_face.front() == doctest::Approx(0.0).scale(1.0));
    CHECK(check_noise_assumptions(nm).pass);
  }
}

TEST_CASE("zero modes give zero fields") {
  const NoiseModel nm(line(16), 0, 2.0);
  for (double v : nm.F1) CHECK(v == 0.0);
}

TEST_CASE("Philox matches the published known-answer vector") {
  // Random123 kat_vectors: philox4x32 R=10 with zero counter and key.
  const auto r = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(r[0] == 0x6627e8d5U);
  CHECK(r[1] == 0xe169c58dU);
  CHECK(r[2] == 0xbc57ac4cU);
  CHECK(r[3] == 0x9b00dbd8U);
}

TEST_CASE("Brownian streams are reproducible and member-addressed") {
  BrownianStream a(7, 3, 4), b(7, 3, 4), c(7, 4, 4);
  const auto x = a.sample_increments(0.01), y = b.sample_increments(0.01), z = c.sample_increments(0.01);
  CHECK(x == y);
  CHECK(x != z);
  std::vector<double> w(4);
  a.increments_at(0, 0.01, w);
  CHECK(w == x);
}

TEST_CASE("aggregated increments are sums of the fine increments") {
  const BrownianStream s(11, 0, 3);
  std::vector<double> fine(3), sum(3, 0.0), agg(3);
  for (int k = 0; k < 4; ++k) {
    s.increments_at(8 + k, 0.25, fine);
    for (int j = 0; j < 3; ++j) sum[j] += fine[j];
  }
  s.aggregated_increments(8, 4, 0.25, agg);
  for (int j = 0; j < 3; ++j) CHECK(agg[j] == doctest::Approx(sum[j]));
}

TEST_CASE("increments have mean 0 and variance dt") {
  BrownianStream s(5, 0, 1);
  const int N = 200000;
  const double dt = 0.04;
  double m = 0.0, v = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = s.sample_increments(dt)[0];
    m += x;
    v += x * x;
  }
  m /= N;
  v = v / N - m * m;
  CHECK(std::abs(m) < 5.0 * std::sqrt(dt / N));
  CHECK(v == doctest::Approx(dt).epsilon(0.02));
}

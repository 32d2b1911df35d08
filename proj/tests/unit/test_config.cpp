#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dk/config.hpp"
#include "dk/error.hpp"

using namespace dk;

TEST_CASE("INI sections become dotted keys") {
  std::istringstream in("experiment = heat-oracle\nseed = 5\n[domain]\nn_cells = 64\n[solver]\nT = 0.5\n");
  const auto values = read_config(in);
  CHECK(values.at("experiment") == "heat-oracle");
  CHECK(values.at("domain.n_cells") == "64");
  const RunConfig c = resolve_config(values);
  CHECK(c.seed == 5);
  CHECK(c.domain.n_cells[0] == 64);
  CHECK(c.solver.T == 0.5);
  CHECK(c.snapshot_every == doctest::Approx(0.05));
  CHECK(c.flat.size() == config_registry().size());
}

TEST_CASE("unknown and malformed keys name the key path") {
  auto error_key = [](std::map<std::string, std::string> v) {
    try {
      resolve_config(v);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(error_key({{"experiment", "energy"}, {"solver.bogus", "1"}}) == "solver.bogus");
  CHECK(error_key({{"experiment", "energy"}, {"solver.T", "abc"}}) == "solver.T");
  CHECK(error_key({{"experiment", "energy"}, {"solver.T", "-1"}}) == "solver.T");
  CHECK(error_key({{"experiment", "nope"}}) == "experiment");
  CHECK(error_key({{"seed", "1"}}) == "experiment");
  CHECK(error_key({{"experiment", "energy"}, {"solver.scheme", "rk4"}}) == "solver.scheme");
  CHECK(error_key({{"experiment", "energy"}, {"domain.n_cells", "4"}}) == "domain.n_cells");
  CHECK(error_key({{"experiment", "energy"}, {"solver.fbar_left", "-1"}}) == "solver.fbar_left");
}

TEST_CASE("module validation runs before stepping") {
  CHECK_THROWS_AS(resolve_config({{"experiment", "galerkin-cross"}, {"solver.galerkin_modes", "500"}}),
                  ConfigError);
}

TEST_CASE("experiment defaults sit below file values") {
  const RunConfig a = resolve_config({{"experiment", "steady-state"}});
  CHECK(a.m == 2.0);
  CHECK(a.solver.fbar.right == 4.0);
  const RunConfig b = resolve_config({{"experiment", "steady-state"}, {"coeffs.m", "3"}});
  CHECK(b.m == 3.0);
}

TEST_CASE("every registry key has a help line and a valid fallback") {
  std::set<std::string> keys;
  for (const auto& k : config_registry()) {
    CHECK_FALSE(k.help.empty());
    CHECK(keys.insert(k.key).second);
  }
  for (const char* e : {"heat-oracle", "steady-state", "contraction", "ito-strat", "energy", "entropy",
                        "kinetic-decay", "residual", "galerkin-cross"})
    CHECK_NOTHROW(resolve_config({{"experiment", e}}));
}

TEST_CASE("profile families") {
  ProfileSpec p;
  p.kind = "hole";
  p.level = 2.0;
  const auto f = p.build(1.0);
  CHECK(f(0.5) == 0.0);
  CHECK(f(0.0) == doctest::Approx(2.0));
  CHECK(f(0.725) == doctest::Approx(1.0));
  p.kind = "linear";
  p.offset = 1.0;
  p.amplitude = 3.0;
  CHECK(p.build(2.0)(1.0) == doctest::Approx(2.5));
  p.kind = "spiral";
  CHECK_THROWS_AS(p.build(1.0), InvalidArgument);
}

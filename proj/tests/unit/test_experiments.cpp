#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "dk/experiments.hpp"

using namespace dk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dk_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> small_heat() {
  return {{"experiment", "heat-oracle"}, {"domain.n_cells", "32"}, {"solver.dt", "0.0002"},
          {"solver.T", "0.02"}, {"check.tolerance", "1e-2"}};
}

}  // namespace

TEST_CASE("catalogue lists nine experiments and covers every criterion once") {
  const auto& cat = experiment_catalogue();
  CHECK(cat.size() == 9);
  std::multiset<std::string> ids;
  for (const auto& e : cat) {
    CHECK_NOTHROW(resolve_config({{"experiment", e.name}}));
    for (const auto& c : e.criteria) ids.insert(c);
  }
  for (int i = 1; i <= 13; ++i) CHECK(ids.count("AC-" + std::to_string(i)) == 1);
  CHECK(ids.size() == 13);
}

TEST_CASE("a run writes all artifacts and is reproducible") {
  const fs::path a = scratch("a"), b = scratch("b");
  std::ostringstream log;
  CHECK(run_config_map(small_heat(), a.string(), log) == exit_ok);
  CHECK(run_config_map(small_heat(), b.string(), log) == exit_ok);
  for (const char* f : {"manifest.json", "snapshots.ndjson", "reports.ndjson", "histograms.csv"})
    CHECK(fs::exists(a / f));
  CHECK(slurp(a / "snapshots.ndjson") == slurp(b / "snapshots.ndjson"));
  CHECK(slurp(a / "reports.ndjson") == slurp(b / "reports.ndjson"));

  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(m["exit_code"] == 0);
  CHECK(m["pass"] == true);
  CHECK(m["config"]["domain.n_cells"] == "32");
  CHECK(m["metrics"]["max_error"].get<double>() <= 1e-2);

  std::istringstream lines(slurp(a / "snapshots.ndjson"));
  std::string line;
  int records = 0;
  while (std::getline(lines, line)) {
    CHECK(nlohmann::json::accept(line));
    ++records;
  }
  CHECK(records == 11);

  // Replay into the default directory reproduces the outputs.
  CHECK(replay_manifest((a / "manifest.json").string(), std::nullopt, log) == exit_ok);
  CHECK(slurp(a / "replay" / "snapshots.ndjson") == slurp(a / "snapshots.ndjson"));
  CHECK(slurp(a / "replay" / "reports.ndjson") == slurp(a / "reports.ndjson"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("exit codes") {
  std::ostringstream log;
  auto v = small_heat();
  v["solver.nonsense"] = "1";
  CHECK(run_config_map(v, scratch("c").string(), log) == exit_config_error);
  CHECK(log.str().find("solver.nonsense") != std::string::npos);

  v = small_heat();
  v["check.tolerance"] = "1e-12";
  CHECK(run_config_map(v, scratch("d").string(), log) == exit_check_failed);

  v = small_heat();
  v["solver.dt"] = "0.01";
  CHECK(run_config_map(v, scratch("e").string(), log) == exit_config_error);

  CHECK(run_config_file("/nonexistent/file.ini", std::nullopt, log) == exit_config_error);
  fs::remove_all(scratch("d"));
}

TEST_CASE("harmonic study oracles") {
  const HarmonicStudy h = harmonic_study(32);
  CHECK(h.error_1d < 1e-12);
  CHECK(h.error_quadratic < 1e-6);
  CHECK(h.ratios.size() == 2);
  CHECK(h.ratios.back() > 3.0);
}

TEST_CASE("ensemble results do not depend on the worker count") {
  DomainSpec s;
  s.n_cells = {16, 1};
  Grid g = build_grid(s);
  CoefficientSet c = smooth_sigma(make_model_case(1.0, SigmaKind::sqrt), 4);
  NoiseModel nm = make_sine_modes(g, 2, 2.0, 0.5);
  SolverConfig cfg;
  cfg.T = 0.02;
  cfg.fbar = {1.0, 1.0};
  const Problem p{std::move(g), std::move(c), std::move(nm), cfg};
  const ScalarFn a = [](double x) { return 1.0 + 0.5 * std::sin(3.0 * x); };
  const ScalarFn b = [](double x) { return 1.0 + 0.3 * std::cos(5.0 * x); };
  const ContractionStudy one = contraction_study(p, a, b, 5, 9, 1, 0.005);
  const ContractionStudy three = contraction_study(p, a, b, 5, 9, 3, 0.005);
  CHECK(one.stats.excess == three.stats.excess);
  CHECK(one.clip_fraction == three.clip_fraction);
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dk/runner.hpp"

namespace dk {

/// Initial profile families on [0, L].
///   constant: level
///   sine:     offset + amplitude sin(wavenumber pi x / L)
///   linear:   offset + amplitude x / L
///   hole:     offset + level * clamp((|x - center| - radius) / width, 0, 1)
struct ProfileSpec {
  std::string kind = "sine";
  double level = 1.0;
  double offset = 0.0;
  double amplitude = 1.0;
  double wavenumber = 1.0;
  double center = 0.5;
  double radius = 0.15;
  double width = 0.15;

  ScalarFn build(double L) const;
};

/// Fully resolved run configuration. `flat` holds every registered key with
/// its resolved value and is what manifests record.
struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int ensemble_size = 1;
  int workers = 0;  // 0: hardware concurrency

  DomainSpec domain;
  double m = 1.0;
  SigmaKind sigma = SigmaKind::sqrt;
  double nu_c = 0.0;
  int smoothing_n = 0;  // 0: sigma unsmoothed

  int K = 0;
  double decay_p = 2.0;
  double noise_scale = 1.0;

  SolverConfig solver;
  ProfileSpec initial, initial_b;

  std::string output_dir = "out";
  double snapshot_every = 0.0;
  bool write_profiles = true;

  std::map<std::string, std::string> flat;

  double real(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  const std::string& text(const std::string& key) const;
};

struct ConfigKey {
  std::string key;
  std::string fallback;
  std::string type;  // real, int, uint, bool, reals, or an enum "a|b|c"
  std::string help;
};

/// Every key a config file may set.
const std::vector<ConfigKey>& config_registry();

/// Experiment-specific default overrides, applied below the file's values.
std::map<std::string, std::string> experiment_defaults(const std::string& experiment);

/// Resolves a flat key/value map (dotted keys). Throws ConfigError naming the
/// offending key for unknown keys, malformed values and failed validation.
RunConfig resolve_config(const std::map<std::string, std::string>& values);

/// Reads an INI-style file: top-level keys plus [section] blocks whose keys
/// become section.key.
std::map<std::string, std::string> read_config_file(const std::string& path);
std::map<std::string, std::string> read_config(std::istream& in, const std::string& source = "<stream>");

RunConfig load_config(const std::string& path);

/// Problem assembled from a resolved configuration (grid, coefficients, noise, solver).
Problem make_problem(const RunConfig& cfg);
Problem make_problem(const RunConfig& cfg, int n_cells);

}  // namespace dk

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dk/config.hpp"
#include "dk/diagnostics.hpp"
#include "dk/kinetic.hpp"

namespace dk {

enum ExitCode : int {
  exit_ok = 0,
  exit_check_failed = 1,
  exit_config_error = 2,
  exit_numerical_failure = 3,
};

/// One graded comparison value in [lo, hi].
struct Check {
  std::string name;
  std::string criterion;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool pass = false;
  std::string note;
};

Check check_at_most(std::string name, std::string criterion, double value, double limit);
Check check_at_least(std::string name, std::string criterion, double value, double limit);
Check check_within(std::string name, std::string criterion, double value, double lo, double hi);

struct LabelledHistogram {
  std::string label;
  KineticHistogram histogram;
};

struct ExperimentOutput {
  std::string experiment;
  std::vector<Check> checks;
  std::vector<EstimateReport> reports;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::vector<nlohmann::ordered_json> snapshots;  // NDJSON records in write order
  std::vector<LabelledHistogram> histograms;

  bool pass() const;
};

struct CatalogueEntry {
  std::string name;
  std::string description;
  std::string statement;
  std::vector<std::string> criteria;
};

const std::vector<CatalogueEntry>& experiment_catalogue();

/// Runs the configured experiment; throws ConfigError, InvalidArgument or NumericalError.
ExperimentOutput run_experiment(const RunConfig& cfg);

/// Writes manifest.json, snapshots.ndjson, reports.ndjson and histograms.csv.
void write_artifacts(const std::string& dir, const RunConfig& cfg, const ExperimentOutput& out,
                     int exit_code);

/// Loads, runs and writes; returns the process exit code. Messages go to `log`.
int run_config_file(const std::string& path, const std::optional<std::string>& out_dir,
                    std::ostream& log);
int run_config_map(const std::map<std::string, std::string>& values,
                   const std::optional<std::string>& out_dir, std::ostream& log);

/// Re-runs the configuration recorded in a manifest.
int replay_manifest(const std::string& manifest_path, const std::optional<std::string>& out_dir,
                    std::ostream& log);

const char* library_version();

// ---------------------------------------------------------------------------
// Studies shared by the experiments and the acceptance suite

struct HarmonicStudy {
  double error_1d = 0.0;         // linear data on the interval
  double error_quadratic = 0.0;  // x^2 - y^2 on the square
  std::vector<int> cells;        // refinement levels of the smooth oracle
  std::vector<double> errors;    // exp(x) cos(y) errors per level
  std::vector<double> ratios;    // errors[i] / errors[i + 1]
};

HarmonicStudy harmonic_study(int n_cells);

struct ContractionStudy {
  ContractionStats stats;
  double clip_fraction = 0.0;  // largest clipped mass over initial mass, both solutions
};

ContractionStudy contraction_study(const Problem& problem, const ScalarFn& a, const ScalarFn& b,
                                   int members, std::uint64_t seed, int workers,
                                   double snapshot_every);

struct SchemeGapStudy {
  std::vector<double> dts;
  std::vector<double> gaps;  // sqrt(E ||rho_ito(T) - rho_strat(T)||_{L2}^2)
  std::vector<double> gap_stderr;
};

/// Ito-Euler and Stratonovich-Heun on one Brownian path per member at dt0 / 2^l.
SchemeGapStudy scheme_gap_study(const Problem& problem, const ScalarFn& rho0, int members,
                                std::uint64_t seed, int levels, double dt0, int workers);

struct DecayStudy {
  KineticHistogram histogram;  // ensemble mean
  double max_rho = 0.0;
  double clip_fraction = 0.0;  // largest clipped mass over initial mass
};

DecayStudy kinetic_decay_study(const Problem& problem, const ScalarFn& rho0, int members,
                               std::uint64_t seed, int workers, int dyadic_levels,
                               int unit_levels, int windows);

/// Kinetic-equation residual of one run with velocity spacing d_xi.
KineticResidual residual_run(const Problem& problem, const ScalarFn& rho0,
                             const TestFunction& psi, std::uint64_t seed, std::uint32_t member,
                             double d_xi);

struct IbpStudy {
  std::vector<int> cells;
  std::vector<double> discrepancy;
  std::vector<double> constant;  // discrepancy / h
};

IbpStudy ibp_study(const ScalarFn& profile, const TestFunction& psi, double extent,
                   std::vector<int> cells);

struct ConservationStudy {
  std::vector<std::string> schemes;
  std::vector<double> drift;  // max relative mass drift over the steps
};

ConservationStudy conservation_study(const Problem& problem, const ScalarFn& rho0, int steps,
                                     std::uint64_t seed);

}  // namespace dk

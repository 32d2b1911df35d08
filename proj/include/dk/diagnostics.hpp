#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dk/harmonic.hpp"
#include "dk/runner.hpp"

namespace dk {

using NamedValues = std::vector<std::pair<std::string, double>>;

/// One monitored inequality lhs <= c * sum(rhs_terms).
struct EstimateReport {
  std::string name;
  double lhs = 0.0;
  double lhs_stderr = 0.0;
  NamedValues lhs_terms;
  NamedValues rhs_terms;
  double fitted_constant = 0.0;  // (lhs + 2 stderr) / sum(rhs_terms)
  double c_max = std::numeric_limits<double>::infinity();
  bool pass = true;
  bool graded = true;
  std::string note;

  double rhs_total() const;
  double term(const std::string& key) const;
};

/// Fills fitted_constant and pass from lhs, lhs_stderr, rhs_terms and c_max.
void grade(EstimateReport& report);

/// Time integrals of one run, accumulated step by step with left-point states.
/// Gradients live on faces; the two Dirichlet faces use the boundary value at
/// distance h/2 and half weight.
struct RunIntegrals {
  double T = 0.0;
  double grad_theta_sq = 0.0;       // int int |grad Theta_Phi(rho)|^2
  double grad_rho_sq = 0.0;         // int int |grad rho|^2
  double grad_sqrt_phi_sq = 0.0;    // int int |grad Phi^{1/2}(rho)|^2
  double log_weighted = 0.0;        // int int Phi'(rho)/Phi(rho) |grad rho|^2
  double lk = 0.0;                  // int int |rho|^k
  double lk_exponent = 0.0;
  double band_dissipation = 0.0;    // int int 1_{M1<rho<M2} (Phi'(rho) + alpha) |grad rho|^2
  double band_sigma = 0.0;          // int int 1_{rho>=M1} sigma^2(rho ^ M2)
  double initial_excess = 0.0;      // int (rho_0 - M1)_+
  double final_l2 = 0.0;            // ||rho_T||_{L2}
  std::uint64_t faces = 0;
  std::uint64_t excluded_faces = 0;  // faces where Phi'/Phi is singular
  std::vector<double> t;             // snapshot times
  std::vector<double> deviation;     // int (rho - g)^2 at the snapshots
  std::vector<double> entropy;       // int Psi_{Phi,0}(x, rho) at the snapshots (if requested)
};

struct IntegralOptions {
  double lk_exponent = 0.0;  // 0 disables the |rho|^k integral
  double band_M1 = 0.0, band_M2 = 0.0;  // empty band disables the band integrals
  bool entropy = false;                 // entropy functional at the snapshots
};

class IntegralAccumulator {
 public:
  IntegralAccumulator(const Problem& problem, const IntegralOptions& options = {});

  void observe(const FieldState& state, double dt);
  StepObserver observer();

  /// Adds the snapshot functionals of a finished run and returns the integrals.
  RunIntegrals finish(const Trajectory& traj) const;
  const RunIntegrals& partial() const noexcept { return acc_; }

 private:
  const Problem& problem_;
  IntegralOptions options_;
  bool periodic_;
  double rho_l_, rho_r_;
  RunIntegrals acc_;
  std::vector<double> theta_, root_;
};

/// Runs the problem with an IntegralAccumulator attached.
RunIntegrals run_with_integrals(const Problem& problem, const ScalarFn& rho0, std::uint64_t seed,
                                std::uint32_t member, RunOptions options,
                                const IntegralOptions& integrals = {});

/// int (rho - g)^2 with g at the cell centres.
double deviation_integral(std::span<const double> rho, const HarmonicField& g, double h);

/// int rho log rho with 0 log 0 = 0.
double entropy_integral(std::span<const double> rho, double h);

/// v_0: harmonic with data log(fbar); throws for non-positive data.
HarmonicField entropy_potential(const Grid& grid, const BoundaryData& fbar);

/// int Psi_{Phi,0}(x, rho) with Psi_{Phi,0}(x, .) shifted to vanish at its
/// minimiser Phi^{-1}(exp v_0(x)). Throws if the value is not finite.
double entropy_functional(std::span<const double> rho, const Grid& grid,
                          const CoefficientSet& coeffs, const HarmonicField& v0);

/// ||Theta_Phi(g)||_{H^1(U)} for the linear lift with data Phi^{-1}(fbar).
double theta_g_h1_norm(const Grid& grid, const CoefficientSet& coeffs, const BoundaryData& fbar);

/// Shared inputs of the estimate reports.
struct EstimateContext {
  const Grid& grid;
  const CoefficientSet& coeffs;
  const NoiseModel& noise;
  BoundaryData fbar;
  double alpha = 0.0;
  double T = 0.0;
  double c_max = std::numeric_limits<double>::infinity();
};

/// First energy estimate over an ensemble. Expectations are ensemble means.
EstimateReport energy_report(std::span<const RunIntegrals> ensemble, const EstimateContext& ctx);

/// Second energy estimate for the band (M1, M2). Reported, never graded.
EstimateReport band_energy_report(std::span<const RunIntegrals> ensemble,
                                  const EstimateContext& ctx, double M1, double M2);

/// Entropy estimate over an ensemble; needs integrals finished with entropy samples.
EstimateReport entropy_report(std::span<const RunIntegrals> ensemble, const EstimateContext& ctx);

/// int_0^T int |rho|^k <= c (T/eps + eps T ||Theta_Phi(g)||_{H^1} + eps int int |grad Theta_Phi|^2).
EstimateReport lk_norm_report(std::span<const RunIntegrals> ensemble, const EstimateContext& ctx,
                              double k, double epsilon);

struct ContractionStats {
  std::vector<double> excess;  // relative (or absolute, see absolute_branch) per member
  std::vector<bool> absolute_branch;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  double threshold = 0.02;
  double abs_tol = 1e-12;
};

/// Relative excess (sup_t d_t - d_0) / d_0 per member; members with d_0 = 0
/// are judged on sup_t d_t <= abs_tol instead.
ContractionStats contraction_report(std::span<const PairSeries> pairs, double threshold = 0.02,
                                    double abs_tol = 1e-12);

struct MetricD {
  double value = 0.0;
  double tail_bound = 0.0;    // 2^{-k_max}
  std::vector<double> norms;  // n_k = ||Phi_{1/k}(f) - Phi_{1/k}(g)||_{L1 L1}, k = 1..k_max
};

/// Truncated metric sum_k 2^{-k} n_k / (1 + n_k); time integral by the
/// trapezoid rule over the common snapshot times.
MetricD metric_D(const Trajectory& f, const Trajectory& g, double h, int k_max = 20);

}  // namespace dk

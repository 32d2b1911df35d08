#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "dk/solver.hpp"

namespace dk {

/// Everything a run needs besides the initial profile and the noise seed.
struct Problem {
  Grid grid;
  CoefficientSet coeffs;
  NoiseModel noise;
  SolverConfig cfg;
};

/// Scheme-independent stepping front end.
class Integrator {
 public:
  explicit Integrator(const Problem& problem);

  FieldState init(const ScalarFn& rho0) const;
  double cfl_dt(const FieldState& state, double theta) const;
  double cfl_dt(const FieldState& state) const;
  void step(FieldState& state, double dt, std::span<const double> dW,
            const BrownianStream* stream = nullptr) const;
  bool spectral() const noexcept { return galerkin_ != nullptr; }
  const FVStepper* fv() const noexcept { return fv_.get(); }
  const GalerkinStepper* galerkin() const noexcept { return galerkin_.get(); }

 private:
  const Problem& problem_;
  std::unique_ptr<FVStepper> fv_;
  std::unique_ptr<GalerkinStepper> galerkin_;
};

struct Snapshot {
  double t = 0.0;
  std::uint64_t step = 0;
  std::vector<double> rho;
  double mass = 0.0, min_rho = 0.0, clip_ledger = 0.0, boundary_inflow = 0.0;
};

/// Called before every step with the state at the left end of the step.
using StepObserver = std::function<void(const FieldState&, double dt, std::span<const double> dW)>;

struct RunOptions {
  double snapshot_every = 0.0;  // time between snapshots; 0 keeps only t = 0 and t = T
  int aggregate = 1;            // increments summed from this many fine steps (fixed dt)
  bool keep_rho = true;         // store density profiles in snapshots
  bool every_step = false;      // snapshot after every step
  bool record_increments = false;
  StepObserver observer;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<double> dts;
  std::vector<double> increments;  // steps x K when recorded
  FieldState final_state;
  double initial_mass = 0.0;
};

/// Steps from t = 0 to T. Member `member` of seed `seed` supplies the noise.
Trajectory run(const Problem& problem, const ScalarFn& rho0, std::uint64_t seed,
               std::uint32_t member, const RunOptions& options = {});

struct PairSeries {
  std::vector<double> t;
  std::vector<double> distance;     // L1 distance at the snapshot times
  std::vector<double> running_sup;  // sup over all steps up to the snapshot
  FieldState a, b;
};

/// Two solutions driven by one Brownian path, stepped in lockstep with the
/// smaller of their two admissible time steps.
PairSeries run_coupled_pair(const Problem& problem, const ScalarFn& rho0_a, const ScalarFn& rho0_b,
                            std::uint64_t seed, std::uint32_t member,
                            const RunOptions& options = {});

double l1_distance(std::span<const double> a, std::span<const double> b, double h);

std::size_t default_workers();

/// Runs body(i) for i in [0, count) on a bounded pool. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

/// Parallel map collecting results by index, so output order never depends on scheduling.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, std::size_t workers, F&& body) {
  std::vector<T> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = body(i); });
  return out;
}

}  // namespace dk

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dk {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Brownian increments for one ensemble member. Every draw is a pure function
/// of (master_seed, member_id, mode k, step, tag), so members can run in any
/// order and a re-created stream replays bit-for-bit.
class BrownianStream {
 public:
  BrownianStream(std::uint64_t master_seed, std::uint32_t member_id, int K);

  int modes() const noexcept { return K_; }
  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint32_t member_id() const noexcept { return member_; }
  std::uint64_t position() const noexcept { return step_; }
  void seek(std::uint64_t step) noexcept { step_ = step; }

  /// K increments N(0, dt) for the current step; advances the stream.
  std::vector<double> sample_increments(double dt);
  void sample_increments(double dt, std::span<double> out);

  /// Increments of a given step without touching the stream position.
  void increments_at(std::uint64_t step, double dt, std::span<double> out) const;

  /// Sum of `count` consecutive fine increments starting at `first_fine_step`.
  /// Coarse paths built this way are the same Brownian path as the fine one.
  void aggregated_increments(std::uint64_t first_fine_step, int count, double dt_fine,
                             std::span<double> out) const;

  /// Standard normal used to bisect the increment of `step` (Brownian bridge),
  /// addressed by bisection depth and node index within that depth.
  double bridge_normal(std::uint64_t step, int k, int depth, std::uint32_t node) const;

  double standard_normal(int k, std::uint64_t step, std::uint32_t tag, std::uint32_t sub) const;

 private:
  std::uint64_t seed_;
  std::uint32_t member_;
  int K_;
  std::uint64_t step_ = 0;
};

}  // namespace dk

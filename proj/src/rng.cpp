#include "dk/rng.hpp"

#include <cmath>
#include <numbers>

#include "dk/error.hpp"

namespace dk {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

BrownianStream::BrownianStream(std::uint64_t master_seed, std::uint32_t member_id, int K)
    : seed_(master_seed), member_(member_id), K_(K) {
  if (K < 0 || K >= (1 << 12)) throw InvalidArgument("mode count must lie in [0, 4096)");
}

double BrownianStream::standard_normal(int k, std::uint64_t step, std::uint32_t tag,
                                       std::uint32_t sub) const {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
      static_cast<std::uint32_t>(k) | (tag & 0xFu) << 12 | (sub & 0xFFFFu) << 16, member_};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  const auto r = philox4x32(ctr, key);
  const double u1 = to_open_unit(r[0], r[1]);
  const double u2 = to_open_unit(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void BrownianStream::increments_at(std::uint64_t step, double dt, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(K_))
    throw InvalidArgument("increment buffer size must equal the mode count");
  const double s = std::sqrt(std::max(dt, 0.0));
  for (int k = 0; k < K_; ++k) out[k] = s * standard_normal(k, step, 0, 0);
}

void BrownianStream::sample_increments(double dt, std::span<double> out) {
  increments_at(step_, dt, out);
  ++step_;
}

std::vector<double> BrownianStream::sample_increments(double dt) {
  std::vector<double> out(K_);
  sample_increments(dt, out);
  return out;
}

void BrownianStream::aggregated_increments(std::uint64_t first_fine_step, int count,
                                           double dt_fine, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(K_))
    throw InvalidArgument("increment buffer size must equal the mode count");
  const double s = std::sqrt(std::max(dt_fine, 0.0));
  for (int k = 0; k < K_; ++k) {
    double sum = 0.0;
    for (int j = 0; j < count; ++j) sum += standard_normal(k, first_fine_step + j, 0, 0);
    out[k] = s * sum;
  }
}

double BrownianStream::bridge_normal(std::uint64_t step, int k, int depth,
                                     std::uint32_t node) const {
  if (depth < 1 || depth > 15) throw InvalidArgument("bridge depth must lie in [1, 15]");
  return standard_normal(k, step, static_cast<std::uint32_t>(depth), node);
}

}  // namespace dk

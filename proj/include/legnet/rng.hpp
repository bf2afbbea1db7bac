#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace legnet::sim {

// splitmix64; used instead of <random> engines so simulation runs are
// reproducible bit-for-bit across standard library implementations.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Standard-normal stream via the Box-Muller transform over splitmix64.
class GaussianStream {
 public:
  // Substream `index` of a master seed; distinct indices decorrelate.
  GaussianStream(std::uint64_t seed, std::uint64_t index) {
    state_ = seed ^ (0xD1B54A32D192ED03ull * (index + 1));
    (void)splitmix64(state_);  // burn-in mixes the xor into the state
  }

  double next() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0,1], u2 in [0,1)
    const double u1 =
        (static_cast<double>(splitmix64(state_) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace legnet::sim

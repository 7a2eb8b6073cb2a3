#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace simap {

// Counter-based generator: a 64-bit key plus an incrementing counter pushed
// through the SplitMix64 finalizer. split() derives an independent child
// stream addressed by id without consuming parent state, so per-series /
// per-trial streams are reproducible regardless of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kGamma)) {}

  std::uint64_t next_u64() { return mix(key_ + kGamma * ++counter_); }

  Rng split(std::uint64_t stream_id) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(stream_id + kGamma));
    child.counter_ = 0;
    return child;
  }

  // in [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, two uniforms per draw; no cached spare so the stream layout
  // stays position-independent.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // unbiased enough for index work (bias < n / 2^64)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace simap

#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace l1tv {

// Deterministic RNG layer. Every randomized routine in the library derives its
// stream from an explicit 64-bit seed so that results are bit-reproducible
// across runs and builds:
//   * engine: std::mt19937_64 (output sequence fixed by the C++ standard),
//   * uniforms: top 53 bits of the engine output mapped to [0,1),
//   * normals: Marsaglia polar transform (std::normal_distribution is
//     implementation-defined and therefore avoided).
// Substreams for trial-parallel work are derived with splitmix64 so that
// serial and parallel schedules consume identical per-trial streams.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed for the substream `index` of a run-level seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0,...,bound-1}; bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  // Standard normal via the polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double mul = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * mul;
    has_spare_ = true;
    return u * mul;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace l1tv

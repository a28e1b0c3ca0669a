#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace matcol {

// Stream tags for derive_seed. Keeping them in one place avoids accidental
// stream collisions between modules.
enum SeedStream : std::uint64_t {
  kStreamColumnDraws = 1,
  kStreamRowDraws = 2,
  kStreamCleanFactors = 3,
  kStreamNoise = 4,
  kStreamNystromColumns = 5,
  kStreamNystromRows = 6,
  kStreamReference = 7,
  kStreamSweepD = 8,
  kStreamSweepS = 9,
  kStreamComparison = 10,
  kStreamObservation = 11,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a base seed and a list of stream tags, so every
// stochastic operation owns its own reproducible stream.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t base, Tags... tags) {
  std::uint64_t state = mix_seed(base);
  ((state = mix_seed(state ^ static_cast<std::uint64_t>(tags))), ...);
  return state;
}

// Seeded generator with fully specified algorithms: mt19937_64 for bits,
// Box-Muller for gaussians, rejection sampling for bounded integers. For a
// given seed the output stream is bit-identical across platforms; tests that
// compare against other implementations use statistics, not bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [0, bound) without modulo bias.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t min = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= min) return x % bound;
    }
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_unit();  // (0, 1], keeps log finite
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace matcol

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace phhmm {

// SplitMix64 finalizer. Used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Substream seed for replicate/restart `index` under `base`. Replicates
// sampled from streams with distinct indices never share state, so parallel
// fan-out is reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base + 0x9E3779B97F4A7C15ULL * (index + 1));
}

// Seeded random stream with explicit sampling routines. The standard
// library's distribution objects are implementation-defined, so every draw
// here is spelled out: same seed means the same values on every platform.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream substream(std::uint64_t base, std::uint64_t index) {
    return RandomStream(derive_seed(base, index));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Index drawn from an unnormalized weight vector by cdf inversion.
  std::size_t pick(const std::vector<double>& weights);

  // Poisson count by sequential inversion (exact for the small means used
  // as discrete inflow laws).
  long poisson(double lambda);

  double exponential(double rate);

private:
  std::mt19937_64 engine_;
};

}  // namespace phhmm

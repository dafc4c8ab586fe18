#pragma once

#include <cstdint>

namespace gian {

// SplitMix64 finalizer. Public-domain construction (Steele, Lea, Flood).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// Combines two 64-bit values into a derived stream seed. Used everywhere a
// sub-stream is needed, e.g. derive_seed(dataset_seed, sample_index).
constexpr std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64_mix(a ^ (splitmix64_mix(b + kGoldenGamma) + kGoldenGamma));
}

// Counter-based generator: output i of stream `seed` is
// splitmix64_mix(seed + (i+1)*kGoldenGamma). Stateless apart from the
// counter, so masks and datasets are reproducible bit-for-bit from (seed,
// counter) alone, on any platform and in any language.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    ++counter_;
    return splitmix64_mix(seed_ + counter_ * kGoldenGamma);
  }

  // 53-bit uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n) via 128-bit multiply-shift (exact, unbiased
  // enough for desk scale, and identical on every platform).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller, cosine branch only: consumes exactly two counter outputs per
  // call, no caching, so the stream position stays predictable.
  double next_gaussian();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace gian

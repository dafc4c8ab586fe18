#include "gian/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gian/rng.hpp"

namespace gian {

const char* pattern_name(Pattern p) {
  switch (p) {
    case Pattern::RandomMissing: return "RM";
    case Pattern::TemporalMissing: return "TM";
    case Pattern::StructuralTemporalMissing: return "STM";
  }
  return "?";
}

Pattern pattern_from_string(const std::string& s) {
  if (s == "RM" || s == "random") return Pattern::RandomMissing;
  if (s == "TM" || s == "temporal") return Pattern::TemporalMissing;
  if (s == "STM" || s == "structural") return Pattern::StructuralTemporalMissing;
  throw std::invalid_argument("unknown corruption pattern '" + s + "' (expected RM, TM or STM)");
}

int masked_count(double rate, int T) {
  return static_cast<int>(std::floor(rate * T + 0.5));
}

namespace {

// First k entries of a seeded partial Fisher-Yates shuffle of [0, T).
std::vector<std::uint8_t> draw_subset_mask(CounterRng& rng, int T, int k) {
  std::vector<int> positions(T);
  std::iota(positions.begin(), positions.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(T - i)));
    std::swap(positions[i], positions[j]);
  }
  std::vector<std::uint8_t> mask(T, 0);
  for (int i = 0; i < k; ++i) mask[positions[i]] = 1;
  return mask;
}

}  // namespace

MaskSet make_mask(const CorruptionSpec& spec, int T) {
  if (T < 1) throw std::invalid_argument("make_mask: T must be >= 1, got " + std::to_string(T));
  if (spec.rate < 0.0 || spec.rate > 1.0) {
    throw std::invalid_argument("make_mask: rate must lie in [0, 1], got " +
                                std::to_string(spec.rate));
  }
  const int k = masked_count(spec.rate, T);
  CounterRng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(T)));

  MaskSet out;
  switch (spec.pattern) {
    case Pattern::RandomMissing:
      for (auto& m : out.masks) m = draw_subset_mask(rng, T, k);
      break;
    case Pattern::TemporalMissing: {
      const auto shared = draw_subset_mask(rng, T, k);
      for (auto& m : out.masks) m = shared;
      break;
    }
    case Pattern::StructuralTemporalMissing: {
      const int start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(T - k + 1)));
      std::vector<std::uint8_t> block(T, 0);
      std::fill(block.begin() + start, block.begin() + start + k, std::uint8_t{1});
      for (auto& m : out.masks) m = block;
      break;
    }
  }
  return out;
}

CorruptedSample apply_mask(const Sample& sample, const MaskSet& masks) {
  CorruptedSample out;
  out.sample = sample;
  out.masks = masks;
  for (Modality m : kModalities) {
    const auto& mask = masks.mask(m);
    Matrix& x = out.sample.x(m);
    if (static_cast<int>(mask.size()) != x.rows()) {
      throw std::invalid_argument("apply_mask: mask length " + std::to_string(mask.size()) +
                                  " does not match sequence length " + std::to_string(x.rows()) +
                                  " for modality " + modality_name(m));
    }
    for (int t = 0; t < x.rows(); ++t) {
      if (!mask[t]) continue;
      for (int c = 0; c < x.cols(); ++c) x(t, c) = 0.0;
    }
  }
  return out;
}

}  // namespace gian

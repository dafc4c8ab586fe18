#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gian/matrix.hpp"

namespace gian {

enum class Modality { V = 0, A = 1, L = 2 };

constexpr std::array<Modality, 3> kModalities{Modality::V, Modality::A, Modality::L};

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::V: return "V";
    case Modality::A: return "A";
    case Modality::L: return "L";
  }
  return "?";
}

// One modality's feature sequence: a T x d_m matrix.
struct ModalitySequence {
  Modality modality = Modality::V;
  Matrix x;

  int T() const { return x.rows(); }
  int dim() const { return x.cols(); }
};

// A multimodal sample: three aligned sequences (shared T) plus a sentiment
// score in [-3, +3].
struct Sample {
  std::array<ModalitySequence, 3> mods;
  double label = 0.0;

  int T() const { return mods[0].x.rows(); }
  const Matrix& x(Modality m) const { return mods[static_cast<int>(m)].x; }
  Matrix& x(Modality m) { return mods[static_cast<int>(m)].x; }
};

// Per-modality boolean vectors; true = temporal position zeroed.
struct MaskSet {
  std::array<std::vector<std::uint8_t>, 3> masks;

  int length() const { return static_cast<int>(masks[0].size()); }
  const std::vector<std::uint8_t>& mask(Modality m) const { return masks[static_cast<int>(m)]; }
};

struct CorruptedSample {
  Sample sample;
  MaskSet masks;
};

}  // namespace gian

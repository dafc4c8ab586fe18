#pragma once

#include <cstdint>
#include <string>

#include "gian/types.hpp"

namespace gian {

// The three modality-imperfection patterns:
//  - RandomMissing: positions drawn independently per modality.
//  - TemporalMissing: one position set shared by all modalities.
//  - StructuralTemporalMissing: one contiguous block shared by all.
enum class Pattern {
  RandomMissing = 0,
  TemporalMissing = 1,
  StructuralTemporalMissing = 2,
};

const char* pattern_name(Pattern p);
Pattern pattern_from_string(const std::string& s);

struct CorruptionSpec {
  Pattern pattern = Pattern::TemporalMissing;
  double rate = 0.0;  // imperfect ratio in [0, 1]
  std::uint64_t seed = 0;
};

// Number of masked positions: round(rate * T), half up.
int masked_count(double rate, int T);

// Deterministic in (spec, T); see README for the exact drawing procedure.
MaskSet make_mask(const CorruptionSpec& spec, int T);

// Masked rows zeroed, everything else bit-identical; input left untouched.
CorruptedSample apply_mask(const Sample& sample, const MaskSet& masks);

}  // namespace gian

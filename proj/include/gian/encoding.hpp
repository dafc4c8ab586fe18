#pragma once

#include "gian/types.hpp"

namespace gian {

// Sinusoidal positional table for a T x d sequence, 0-based time index:
//   PE[t][2k]   = sin(t / 10000^(2k/d))
//   PE[t][2k+1] = cos(t / 10000^(2k/d))
// An unpaired final dimension (odd d) gets the sin term.
Matrix positional_table(int T, int d);

// Returns seq with the positional table added; data-independent otherwise.
ModalitySequence positional_encode(const ModalitySequence& seq);

Matrix positional_encode(const Matrix& x);

}  // namespace gian

#include "gian/encoding.hpp"

#include <cmath>
#include <stdexcept>

namespace gian {

Matrix positional_table(int T, int d) {
  if (d < 1) throw std::invalid_argument("positional_table: dimension must be >= 1");
  Matrix pe(T, d);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < d; ++i) {
      const int k = i / 2;
      const double angle = t / std::pow(10000.0, 2.0 * k / d);
      pe(t, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Matrix positional_encode(const Matrix& x) {
  return add(x, positional_table(x.rows(), x.cols()));
}

ModalitySequence positional_encode(const ModalitySequence& seq) {
  return ModalitySequence{seq.modality, positional_encode(seq.x)};
}

}  // namespace gian

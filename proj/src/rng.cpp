#include "gian/rng.hpp"

#include <cmath>
#include <numbers>

namespace gian {

double CounterRng::next_gaussian() {
  const double u1 = next_double();
  const double u2 = next_double();
  // 1 - u1 lies in (0, 1], keeping the log argument positive.
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gian

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gian {

struct GradCheckReport {
  std::string module;
  double max_rel_err = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Finite-difference verification of every forward path: the op registry,
// LTHM in soft mode, AMGM away from relu kinks, fusion layers, the loss
// stack, and the full dual-branch objective. Probe points are resampled
// until every kinked op clears a 1e-3 margin.
std::vector<GradCheckReport> run_gradcheck_suites(std::uint64_t seed = 2026);

bool all_pass(const std::vector<GradCheckReport>& reports);

}  // namespace gian

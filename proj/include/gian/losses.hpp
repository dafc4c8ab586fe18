#pragma once

#include <array>

#include "gian/autodiff.hpp"

namespace gian {

enum class Divergence { js, kl };

struct RefinementConfig {
  double beta = 0.6;          // stage-vs-fused trade-off in [0, 1]
  double lambda_loss = 0.5;   // weight of the refinement term in the total loss
  bool teacher_stop_gradient = true;
  Divergence divergence = Divergence::js;
};

// The seven tensors one branch produces: per-modality hypergraph features,
// per-modality interaction features, and the fused representation.
struct StageFeatures {
  std::array<ad::Var, 3> f_h;
  std::array<ad::Var, 3> f_d;
  ad::Var fused;
};

// Rows of both tensors are row-softmaxed into distributions; result is the
// per-row Jensen-Shannon divergence (natural log) averaged over rows.
// Always in [0, ln 2].
ad::Var js_divergence(ad::Var f_a, ad::Var f_b);

// KL(P_a || P_b) under the same row-softmax normalization; the ablation
// alternative to JS.
ad::Var kl_divergence(ad::Var f_a, ad::Var f_b);

// L_f = beta * sum_m [JS(F_H^m' || F_H^m) + JS(F_D^m' || F_D^m)]
//     + (1 - beta) * JS(F' || F),
// corrupt branch first. With teacher_stop_gradient the clean features are
// detached so no gradient reaches the teacher.
ad::Var refinement_loss(const StageFeatures& corrupt, const StageFeatures& clean,
                        const RefinementConfig& cfg);

// |y_hat_clean - y| + |y_hat_corrupt - y| for one sample.
ad::Var task_loss(ad::Var y_hat_clean, ad::Var y_hat_corrupt, double label);

// L = L_c + lambda_loss * L_f.
ad::Var total_loss(ad::Var l_c, ad::Var l_f, const RefinementConfig& cfg);

}  // namespace gian

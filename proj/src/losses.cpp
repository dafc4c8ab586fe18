#include "gian/losses.hpp"

#include <stdexcept>

namespace gian {

using ad::Var;

namespace {

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.value().shape_str() + " vs " + b.value().shape_str());
  }
}

// sum_rc P_rc (log P_rc - log Q_rc) / rows, with clamped logs.
Var kl_rows_mean(Var p, Var q) {
  Var kl = ad::sum(ad::mul(p, ad::sub(ad::log_clamped(p), ad::log_clamped(q))));
  return ad::scale(kl, 1.0 / p.rows());
}

}  // namespace

Var js_divergence(ad::Var f_a, ad::Var f_b) {
  require_same_shape(f_a, f_b, "js_divergence");
  Var p = ad::softmax_rows(f_a);
  Var q = ad::softmax_rows(f_b);
  Var m = ad::scale(ad::add(p, q), 0.5);
  return ad::scale(ad::add(kl_rows_mean(p, m), kl_rows_mean(q, m)), 0.5);
}

Var kl_divergence(ad::Var f_a, ad::Var f_b) {
  require_same_shape(f_a, f_b, "kl_divergence");
  return kl_rows_mean(ad::softmax_rows(f_a), ad::softmax_rows(f_b));
}

Var refinement_loss(const StageFeatures& corrupt, const StageFeatures& clean,
                    const RefinementConfig& cfg) {
  if (cfg.beta < 0.0 || cfg.beta > 1.0) {
    throw std::invalid_argument("refinement_loss: beta must lie in [0, 1]");
  }
  for (int m = 0; m < 3; ++m) {
    if (!corrupt.f_h[m].valid() || !clean.f_h[m].valid() || !corrupt.f_d[m].valid() ||
        !clean.f_d[m].valid()) {
      throw std::invalid_argument("refinement_loss: missing stage features");
    }
  }
  if (!corrupt.fused.valid() || !clean.fused.valid()) {
    throw std::invalid_argument("refinement_loss: missing fused features");
  }

  const auto teacher = [&](Var v) { return cfg.teacher_stop_gradient ? ad::detach(v) : v; };
  const auto div = [&](Var student, Var tch) {
    return cfg.divergence == Divergence::js ? js_divergence(student, tch)
                                            : kl_divergence(student, tch);
  };

  Var stage_sum = div(corrupt.f_h[0], teacher(clean.f_h[0]));
  stage_sum = ad::add(stage_sum, div(corrupt.f_d[0], teacher(clean.f_d[0])));
  for (int m = 1; m < 3; ++m) {
    stage_sum = ad::add(stage_sum, div(corrupt.f_h[m], teacher(clean.f_h[m])));
    stage_sum = ad::add(stage_sum, div(corrupt.f_d[m], teacher(clean.f_d[m])));
  }
  Var fused_term = div(corrupt.fused, teacher(clean.fused));
  return ad::add(ad::scale(stage_sum, cfg.beta), ad::scale(fused_term, 1.0 - cfg.beta));
}

Var task_loss(ad::Var y_hat_clean, ad::Var y_hat_corrupt, double label) {
  ad::Tape& t = *y_hat_clean.tape;
  Var y = t.constant(Matrix{{label}}, "label");
  return ad::add(ad::abs(ad::sub(y_hat_clean, y)), ad::abs(ad::sub(y_hat_corrupt, y)));
}

Var total_loss(ad::Var l_c, ad::Var l_f, const RefinementConfig& cfg) {
  if (cfg.lambda_loss < 0.0) {
    throw std::invalid_argument("total_loss: lambda_loss must be >= 0");
  }
  return ad::add(l_c, ad::scale(l_f, cfg.lambda_loss));
}

}  // namespace gian

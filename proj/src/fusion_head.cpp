#include "gian/fusion_head.hpp"

#include <cmath>
#include <stdexcept>

namespace gian {

using ad::Var;

Var layer_norm(ad::Var x, ad::Var gain, ad::Var bias) {
  Var centered = ad::add_colvec(x, ad::scale(ad::row_mean(x), -1.0));
  Var variance = ad::row_mean(ad::mul(centered, centered));
  Var rstd = ad::rsqrt_clamp0(ad::add_scalar(variance, kLayerNormEps));
  Var normalized = ad::mul_colvec(centered, rstd);
  return ad::add_rowvec(ad::mul_rowvec(normalized, gain), bias);
}

namespace {

Var self_attention(Var x, const FusionLayerVars& p) {
  Var query = ad::matmul(x, p.wq);
  Var key = ad::matmul(x, p.wk);
  Var value = ad::matmul(x, p.wv);
  Var scores = ad::scale(ad::matmul(query, ad::transpose(key)), 1.0 / std::sqrt(x.cols()));
  return ad::matmul(ad::matmul(ad::softmax_rows(scores), value), p.wo);
}

Var encoder_layer(Var x, const FusionLayerVars& p) {
  Var attended = layer_norm(ad::add(x, self_attention(x, p)), p.ln1_gain, p.ln1_bias);
  Var ff = ad::matmul(ad::relu(ad::matmul(attended, p.ff1)), p.ff2);
  return layer_norm(ad::add(attended, ff), p.ln2_gain, p.ln2_bias);
}

}  // namespace

Var fuse(const std::array<ad::Var, 3>& features, const FusionVars& p) {
  if (p.layers.empty()) throw std::invalid_argument("fuse: at least one layer required");
  Var x = ad::concat_rows({features[0], features[1], features[2]});
  for (const FusionLayerVars& layer : p.layers) x = encoder_layer(x, layer);
  return x;
}

Var predict(ad::Var fused, const FusionVars& p) {
  ad::Tape& t = *fused.tape;
  const int rows = fused.rows();
  Var pool = t.constant(Matrix::filled(1, rows, 1.0 / rows), "mean_pool");
  Var pooled = ad::matmul(pool, fused);  // 1 x d_h
  return ad::add(ad::matmul(pooled, p.head_w), p.head_b);
}

}  // namespace gian

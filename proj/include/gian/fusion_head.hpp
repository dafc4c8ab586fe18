#pragma once

#include <array>
#include <vector>

#include "gian/autodiff.hpp"
#include "gian/matrix.hpp"

namespace gian {

// One transformer encoder layer: single-head self-attention with output
// projection, 4x feedforward, two layernorms. All linear maps bias-free;
// the layernorms carry gain/bias.
struct FusionLayerParams {
  Matrix wq, wk, wv, wo;      // each d_h x d_h, applied as x * W
  Matrix ff1;                 // d_h x 4 d_h
  Matrix ff2;                 // 4 d_h x d_h
  Matrix ln1_gain, ln1_bias;  // 1 x d_h
  Matrix ln2_gain, ln2_bias;  // 1 x d_h
};

struct FusionParams {
  std::vector<FusionLayerParams> layers;  // >= 1
  Matrix head_w;                          // d_h x 1
  Matrix head_b;                          // 1 x 1
};

struct FusionLayerVars {
  ad::Var wq, wk, wv, wo, ff1, ff2, ln1_gain, ln1_bias, ln2_gain, ln2_bias;
};

struct FusionVars {
  std::vector<FusionLayerVars> layers;
  ad::Var head_w, head_b;
};

constexpr double kLayerNormEps = 1e-5;

// Row-wise layernorm with gain/bias (both 1 x d).
ad::Var layer_norm(ad::Var x, ad::Var gain, ad::Var bias);

// Concatenate (V, A, L) rows, then run the encoder layers; each layer is
// self-attention -> residual -> layernorm -> feedforward -> residual ->
// layernorm.
ad::Var fuse(const std::array<ad::Var, 3>& features, const FusionVars& p);

// y_hat = head_w . mean_over_rows(F) + head_b; a 1x1 unclipped score.
ad::Var predict(ad::Var fused, const FusionVars& p);

}  // namespace gian

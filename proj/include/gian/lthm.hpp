#pragma once

#include "gian/autodiff.hpp"
#include "gian/matrix.hpp"

namespace gian {

// Learnable temporal hypergraph over one modality: a soft T x M incidence
// learned from the sequence itself, then normalized hypergraph convolution.
struct LthmParams {
  Matrix psi;          // d_m x d_proj linear map into the metric space
  Matrix lambda_diag;  // 1 x d_proj, diagonal metric (strictly positive at init)
  Matrix omega;        // d_m x M contribution map
  Matrix theta;        // d_m x d_h output projection
  Matrix w;            // 1 x M hyperedge weights
};

struct LthmVars {
  ad::Var psi, lambda_diag, omega, theta, w;
};

struct LthmConfig {
  double temperature = 1.0;
  bool hard_incidence = false;  // straight-through step instead of sigmoid
  bool eq2_literal = false;     // left degree exponent +1/2 instead of -1/2
};

// Incidence structure plus the degree vectors derived from it.
struct HypergraphVars {
  ad::Var H;  // T x M, entries in [0, 1]
  ad::Var W;  // 1 x M hyperedge weights (the params' w)
  ad::Var D;  // T x 1 node degrees, D_t = sum_e W_e H_te
  ad::Var B;  // 1 x M hyperedge degrees, B_e = sum_t H_te
  int M = 0;
};

// H = eps(Psi(X) diag(lambda) Psi(X)^T Omega(X)); soft eps is
// sigmoid(raw / temperature), hard eps is the straight-through step.
HypergraphVars learn_incidence(ad::Var x, const LthmVars& p, const LthmConfig& cfg);

// F_H = (I - D^-1/2 H diag(W) diag(B)^-1 H^T D^-1/2) X theta, with
// zero degrees mapped to zero by the clamped inverse roots.
ad::Var hypergraph_convolve(ad::Var x, const HypergraphVars& g, const LthmVars& p,
                            const LthmConfig& cfg);

ad::Var lthm_forward(ad::Var x, const LthmVars& p, const LthmConfig& cfg);

}  // namespace gian

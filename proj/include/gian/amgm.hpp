#pragma once

#include <array>
#include <vector>

#include "gian/autodiff.hpp"
#include "gian/types.hpp"

namespace gian {

// Attention parameters for the directed complete graph over {V, A, L}.
// One shared q/k/v set by default; six per-edge sets when per_edge is on.
struct AttnParams {
  Matrix q, k, v;  // each d_h x d_h
};

struct AmgmParams {
  std::vector<AttnParams> sets;  // size 1 (shared) or 6 (per edge)

  bool per_edge() const { return sets.size() == 6; }
};

struct AttnVars {
  ad::Var q, k, v;
};

struct AmgmVars {
  std::vector<AttnVars> sets;

  const AttnVars& edge(Modality i, Modality j) const;
};

struct AmgmConfig {
  double lambda_attn = 1.0;  // threshold multiplier on the row mean
};

// Index of directed edge (i, j), i != j, in the fixed order
// (V,A) (V,L) (A,V) (A,L) (L,V) (L,A).
int edge_index(Modality i, Modality j);

// A_ij = softmax_rows((theta_q F_i^T)^T (theta_k F_j^T)); row r is a
// distribution over j's time steps.
ad::Var cross_modal_similarity(ad::Var f_i, ad::Var f_j, const AttnVars& p);

// F_D_i = F_H_i + sum_j relu(A_ij - lambda * row_mean(A_ij) 1^T) (F_H_j theta_v^T)
ad::Var gat_aggregate(Modality i, const std::array<ad::Var, 3>& features, const AmgmVars& p,
                      const AmgmConfig& cfg);

// All three aggregations from the same pre-update features.
std::array<ad::Var, 3> amgm_forward(const std::array<ad::Var, 3>& features, const AmgmVars& p,
                                    const AmgmConfig& cfg);

}  // namespace gian

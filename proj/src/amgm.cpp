#include "gian/amgm.hpp"

#include <stdexcept>

namespace gian {

using ad::Var;

int edge_index(Modality i, Modality j) {
  const int a = static_cast<int>(i);
  const int b = static_cast<int>(j);
  if (a == b) throw std::invalid_argument("edge_index: no self edges");
  return a * 2 + (b > a ? b - 1 : b);
}

const AttnVars& AmgmVars::edge(Modality i, Modality j) const {
  if (sets.size() == 1) return sets[0];
  return sets[edge_index(i, j)];
}

Var cross_modal_similarity(ad::Var f_i, ad::Var f_j, const AttnVars& p) {
  if (f_i.cols() != f_j.cols()) {
    throw std::invalid_argument("cross_modal_similarity: feature width mismatch " +
                                f_i.value().shape_str() + " vs " + f_j.value().shape_str());
  }
  Var query = ad::matmul(f_i, ad::transpose(p.q));
  Var key = ad::matmul(f_j, ad::transpose(p.k));
  return ad::softmax_rows(ad::matmul(query, ad::transpose(key)));
}

Var gat_aggregate(Modality i, const std::array<ad::Var, 3>& features, const AmgmVars& p,
                  const AmgmConfig& cfg) {
  const Var f_i = features[static_cast<int>(i)];
  Var out = f_i;
  for (Modality j : kModalities) {
    if (j == i) continue;
    const AttnVars& attn = p.edge(i, j);
    Var f_j = features[static_cast<int>(j)];
    Var a_ij = cross_modal_similarity(f_i, f_j, attn);
    // Entries below lambda times their row's mean are treated as noise.
    Var threshold = ad::scale(ad::row_mean(a_ij), -cfg.lambda_attn);
    Var filtered = ad::relu(ad::add_colvec(a_ij, threshold));
    Var message = ad::matmul(filtered, ad::matmul(f_j, ad::transpose(attn.v)));
    out = ad::add(out, message);
  }
  return out;
}

std::array<ad::Var, 3> amgm_forward(const std::array<ad::Var, 3>& features, const AmgmVars& p,
                                    const AmgmConfig& cfg) {
  return {gat_aggregate(Modality::V, features, p, cfg),
          gat_aggregate(Modality::A, features, p, cfg),
          gat_aggregate(Modality::L, features, p, cfg)};
}

}  // namespace gian

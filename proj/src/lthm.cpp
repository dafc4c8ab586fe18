#include "gian/lthm.hpp"

#include <stdexcept>

namespace gian {

using ad::Var;

HypergraphVars learn_incidence(ad::Var x, const LthmVars& p, const LthmConfig& cfg) {
  if (!(cfg.temperature > 0.0)) {
    throw std::invalid_argument("learn_incidence: temperature must be positive");
  }
  ad::Tape& t = *x.tape;
  // S = (X psi) diag(lambda) (X psi)^T, a learned-metric similarity.
  Var proj = ad::matmul(x, p.psi);
  Var sim = ad::matmul(ad::mul_rowvec(proj, p.lambda_diag), ad::transpose(proj));
  // Contribution of every node to every hyperedge.
  Var raw = ad::matmul(sim, ad::matmul(x, p.omega));
  Var h = cfg.hard_incidence ? ad::binarize_st(raw, cfg.temperature)
                             : ad::sigmoid(ad::scale(raw, 1.0 / cfg.temperature));

  HypergraphVars g;
  g.H = h;
  g.W = p.w;
  g.M = h.cols();
  g.D = ad::matmul(h, ad::transpose(p.w));  // T x 1
  g.B = ad::matmul(t.constant(Matrix::ones(1, h.rows()), "ones_row"), h);  // 1 x M
  return g;
}

ad::Var hypergraph_convolve(ad::Var x, const HypergraphVars& g, const LthmVars& p,
                            const LthmConfig& cfg) {
  if (g.H.rows() != x.rows()) {
    throw std::invalid_argument("hypergraph_convolve: incidence rows " +
                                g.H.value().shape_str() + " do not match sequence " +
                                x.value().shape_str());
  }
  Var right_scale = ad::rsqrt_clamp0(g.D);
  Var left_scale = cfg.eq2_literal ? ad::sqrt_clamp0(g.D) : right_scale;
  Var b_inv = ad::inv_clamp0(g.B);

  Var left = ad::mul_colvec(g.H, left_scale);            // D^±1/2 H
  left = ad::mul_rowvec(left, g.W);                      // ... diag(W)
  left = ad::mul_rowvec(left, b_inv);                    // ... diag(B)^-1
  Var right = ad::transpose(ad::mul_colvec(g.H, right_scale));
  Var adjacency = ad::matmul(left, right);               // T x T

  Var projected = ad::matmul(x, p.theta);
  return ad::sub(projected, ad::matmul(adjacency, projected));
}

ad::Var lthm_forward(ad::Var x, const LthmVars& p, const LthmConfig& cfg) {
  HypergraphVars g = learn_incidence(x, p, cfg);
  return hypergraph_convolve(x, g, p, cfg);
}

}  // namespace gian

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gian/amgm.hpp"
#include "gian/autodiff.hpp"
#include "gian/corruption.hpp"
#include "gian/fusion_head.hpp"
#include "gian/losses.hpp"
#include "gian/lthm.hpp"
#include "gian/types.hpp"

namespace gian {

struct Ablation {
  bool no_lthm = false;    // F_H = X theta (plain projection)
  bool no_amgm = false;    // F_D = F_H (no cross-modal messages)
  bool no_strategy = false;  // refinement loss excluded from the objective

  bool operator==(const Ablation&) const = default;
};

struct ModelConfig {
  int d_v = 0, d_a = 0, d_l = 0;  // per-modality input dims
  int d_proj = 32;                // psi projection width
  int d_h = 32;                   // shared hidden size
  int hyperedges = 32;            // M
  int fusion_layers = 2;
  double temperature = 1.0;
  bool hard_incidence = false;
  bool eq2_literal = false;
  double lambda_attn = 1.0;
  bool per_edge_attention = false;
  bool learn_hyperedge_weights = true;
  bool pe_after_corruption = true;

  int dim(Modality m) const {
    switch (m) {
      case Modality::V: return d_v;
      case Modality::A: return d_a;
      case Modality::L: return d_l;
    }
    return 0;
  }
  LthmConfig lthm_config() const { return {temperature, hard_incidence, eq2_literal}; }
  AmgmConfig amgm_config() const { return {lambda_attn}; }
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// All learnable tensors. The flat view follows visit_tensors order: per
// modality (V, A, L) psi, lambda_diag, omega, theta, w; then attention sets
// (q, k, v each); then per fusion layer wq, wk, wv, wo, ff1, ff2, ln1_gain,
// ln1_bias, ln2_gain, ln2_bias; then head_w, head_b. Row-major within each
// tensor.
struct ModelParams {
  std::array<LthmParams, 3> lthm;
  AmgmParams amgm;
  FusionParams fusion;

  std::size_t count() const;
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);
  void add_delta(const std::vector<double>& delta);
};

// Tape-inserted mirror of ModelParams.
struct ParamVars {
  std::array<LthmVars, 3> lthm;
  AmgmVars amgm;
  FusionVars fusion;
};

// Applies f(name, tensor&) to every tensor in the documented flat order.
// Works for ModelParams (Matrix members) and ParamVars (Var members).
template <class P, class F>
void visit_tensors(P& p, F&& f) {
  static const char* kMods[3] = {"V", "A", "L"};
  for (int m = 0; m < 3; ++m) {
    const std::string base = std::string("lthm.") + kMods[m] + ".";
    f(base + "psi", p.lthm[m].psi);
    f(base + "lambda_diag", p.lthm[m].lambda_diag);
    f(base + "omega", p.lthm[m].omega);
    f(base + "theta", p.lthm[m].theta);
    f(base + "w", p.lthm[m].w);
  }
  for (std::size_t s = 0; s < p.amgm.sets.size(); ++s) {
    const std::string base = "amgm." + std::to_string(s) + ".";
    f(base + "q", p.amgm.sets[s].q);
    f(base + "k", p.amgm.sets[s].k);
    f(base + "v", p.amgm.sets[s].v);
  }
  for (std::size_t l = 0; l < p.fusion.layers.size(); ++l) {
    const std::string base = "fusion." + std::to_string(l) + ".";
    auto& layer = p.fusion.layers[l];
    f(base + "wq", layer.wq);
    f(base + "wk", layer.wk);
    f(base + "wv", layer.wv);
    f(base + "wo", layer.wo);
    f(base + "ff1", layer.ff1);
    f(base + "ff2", layer.ff2);
    f(base + "ln1_gain", layer.ln1_gain);
    f(base + "ln1_bias", layer.ln1_bias);
    f(base + "ln2_gain", layer.ln2_gain);
    f(base + "ln2_bias", layer.ln2_bias);
  }
  f("fusion.head_w", p.fusion.head_w);
  f("fusion.head_b", p.fusion.head_b);
}

// Seeded initialization: linear maps uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)),
// lambda_diag and hyperedge weights all ones, layernorm gain 1 / bias 0,
// head bias 0.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// trainable=false inserts constants (inference path).
ParamVars insert_leaves(ad::Tape& tape, const ModelParams& params, bool trainable = true);

// Gradients in flat order after backward(); hyperedge-weight segments are
// zeroed when learn_hyperedge_weights is off.
std::vector<double> collect_grads(const ParamVars& pv, const ModelConfig& cfg);

struct ForwardResult {
  StageFeatures stages;
  ad::Var y_hat;  // 1 x 1
};

// inputs are the already corrupted-and-encoded T x d_m matrices (V, A, L).
ForwardResult forward_model(ad::Tape& tape, const ParamVars& pv,
                            const std::array<Matrix, 3>& inputs, const ModelConfig& cfg,
                            const Ablation& abl = {});

// Corruption/encoding ordering: with pe_after_corruption the mask zeroes raw
// rows and the positional table is added afterwards; otherwise the encoded
// rows are zeroed. mask may be null (clean branch).
std::array<Matrix, 3> prepare_inputs(const Sample& sample, const MaskSet* mask,
                                     bool pe_after_corruption);

// Forward-only scalar prediction.
double predict_sample(const ModelParams& params, const ModelConfig& cfg, const Sample& sample,
                      const MaskSet* mask = nullptr, const Ablation& abl = {});

}  // namespace gian

#include "gian/model.hpp"

#include <cmath>
#include <stdexcept>

#include "gian/encoding.hpp"
#include "gian/rng.hpp"

namespace gian {

void ModelConfig::validate() const {
  if (d_v < 1 || d_a < 1 || d_l < 1) {
    throw std::invalid_argument("ModelConfig: modality dims must be >= 1 (got " +
                                std::to_string(d_v) + "/" + std::to_string(d_a) + "/" +
                                std::to_string(d_l) + ")");
  }
  if (d_proj < 1 || d_h < 1 || hyperedges < 1 || fusion_layers < 1) {
    throw std::invalid_argument("ModelConfig: d_proj, d_h, hyperedges, fusion_layers must be >= 1");
  }
  if (!(temperature > 0.0)) throw std::invalid_argument("ModelConfig: temperature must be > 0");
  if (lambda_attn < 0.0) throw std::invalid_argument("ModelConfig: lambda_attn must be >= 0");
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  visit_tensors(*this, [&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  visit_tensors(*this, [&](const std::string&, const Matrix& m) {
    flat.insert(flat.end(), m.data().begin(), m.data().end());
  });
  return flat;
}

void ModelParams::unflatten(const std::vector<double>& flat) {
  if (flat.size() != count()) {
    throw std::invalid_argument("unflatten: flat size " + std::to_string(flat.size()) +
                                " does not match parameter count " + std::to_string(count()));
  }
  std::size_t off = 0;
  visit_tensors(*this, [&](const std::string&, Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) m.at(i) = flat[off + i];
    off += m.size();
  });
}

void ModelParams::add_delta(const std::vector<double>& delta) {
  if (delta.size() != count()) {
    throw std::invalid_argument("add_delta: size mismatch");
  }
  std::size_t off = 0;
  visit_tensors(*this, [&](const std::string&, Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) m.at(i) += delta[off + i];
    off += m.size();
  });
}

namespace {

constexpr std::uint64_t kParamInitTag = 0x70617261;  // "para"

Matrix uniform_fan_in(CounterRng& rng, int rows, int cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.at(i) = rng.next_uniform(-bound, bound);
  return m;
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  CounterRng rng(derive_seed(seed, kParamInitTag));

  ModelParams p;
  for (int m = 0; m < 3; ++m) {
    const int d_m = cfg.dim(static_cast<Modality>(m));
    LthmParams& l = p.lthm[m];
    l.psi = uniform_fan_in(rng, d_m, cfg.d_proj);
    l.lambda_diag = Matrix::ones(1, cfg.d_proj);
    l.omega = uniform_fan_in(rng, d_m, cfg.hyperedges);
    l.theta = uniform_fan_in(rng, d_m, cfg.d_h);
    l.w = Matrix::ones(1, cfg.hyperedges);
  }
  const int n_sets = cfg.per_edge_attention ? 6 : 1;
  for (int s = 0; s < n_sets; ++s) {
    AttnParams a;
    a.q = uniform_fan_in(rng, cfg.d_h, cfg.d_h);
    a.k = uniform_fan_in(rng, cfg.d_h, cfg.d_h);
    a.v = uniform_fan_in(rng, cfg.d_h, cfg.d_h);
    p.amgm.sets.push_back(std::move(a));
  }
  for (int l = 0; l < cfg.fusion_layers; ++l) {
    FusionLayerParams layer;
    layer.wq = uniform_fan_in(rng, cfg.d_h, cfg.d_h);
    layer.wk = uniform_fan_in(rng, cfg.d_h, cfg.d_h);
    layer.wv = uniform_fan_in(rng, cfg.d_h, cfg.d_h);
    layer.wo = uniform_fan_in(rng, cfg.d_h, cfg.d_h);
    layer.ff1 = uniform_fan_in(rng, cfg.d_h, 4 * cfg.d_h);
    layer.ff2 = uniform_fan_in(rng, 4 * cfg.d_h, cfg.d_h);
    layer.ln1_gain = Matrix::ones(1, cfg.d_h);
    layer.ln1_bias = Matrix::zeros(1, cfg.d_h);
    layer.ln2_gain = Matrix::ones(1, cfg.d_h);
    layer.ln2_bias = Matrix::zeros(1, cfg.d_h);
    p.fusion.layers.push_back(std::move(layer));
  }
  p.fusion.head_w = uniform_fan_in(rng, cfg.d_h, 1);
  p.fusion.head_b = Matrix::zeros(1, 1);
  return p;
}

ParamVars insert_leaves(ad::Tape& tape, const ModelParams& params, bool trainable) {
  ParamVars pv;
  pv.amgm.sets.resize(params.amgm.sets.size());
  pv.fusion.layers.resize(params.fusion.layers.size());

  // Walk both structures in lockstep via the shared visit order.
  std::vector<ad::Var*> slots;
  visit_tensors(pv, [&](const std::string&, ad::Var& v) { slots.push_back(&v); });
  std::size_t slot = 0;
  visit_tensors(params, [&](const std::string& name, const Matrix& m) {
    *slots[slot++] = trainable ? tape.leaf(m, name) : tape.constant(m, name);
  });
  return pv;
}

std::vector<double> collect_grads(const ParamVars& pv, const ModelConfig& cfg) {
  std::vector<double> flat;
  visit_tensors(pv, [&](const std::string& name, const ad::Var& v) {
    Matrix g = v.grad();
    const bool frozen = !cfg.learn_hyperedge_weights && name.ends_with(".w");
    for (std::size_t i = 0; i < g.size(); ++i) flat.push_back(frozen ? 0.0 : g.at(i));
  });
  return flat;
}

ForwardResult forward_model(ad::Tape& tape, const ParamVars& pv,
                            const std::array<Matrix, 3>& inputs, const ModelConfig& cfg,
                            const Ablation& abl) {
  for (int m = 0; m < 3; ++m) {
    if (inputs[m].cols() != cfg.dim(static_cast<Modality>(m))) {
      throw std::invalid_argument(std::string("forward_model: modality ") +
                                  modality_name(static_cast<Modality>(m)) + " has width " +
                                  std::to_string(inputs[m].cols()) + ", config expects " +
                                  std::to_string(cfg.dim(static_cast<Modality>(m))));
    }
  }

  ForwardResult out;
  std::array<ad::Var, 3> f_h;
  for (int m = 0; m < 3; ++m) {
    ad::Var x = tape.constant(inputs[m], std::string("input_") +
                                             modality_name(static_cast<Modality>(m)));
    f_h[m] = abl.no_lthm ? ad::matmul(x, pv.lthm[m].theta)
                         : lthm_forward(x, pv.lthm[m], cfg.lthm_config());
  }
  std::array<ad::Var, 3> f_d =
      abl.no_amgm ? f_h : amgm_forward(f_h, pv.amgm, cfg.amgm_config());
  ad::Var fused = fuse(f_d, pv.fusion);

  out.stages.f_h = f_h;
  out.stages.f_d = f_d;
  out.stages.fused = fused;
  out.y_hat = predict(fused, pv.fusion);
  return out;
}

std::array<Matrix, 3> prepare_inputs(const Sample& sample, const MaskSet* mask,
                                     bool pe_after_corruption) {
  std::array<Matrix, 3> out;
  if (mask == nullptr) {
    for (int m = 0; m < 3; ++m) out[m] = positional_encode(sample.mods[m].x);
    return out;
  }
  if (pe_after_corruption) {
    CorruptedSample corrupted = apply_mask(sample, *mask);
    for (int m = 0; m < 3; ++m) out[m] = positional_encode(corrupted.sample.mods[m].x);
  } else {
    Sample encoded = sample;
    for (int m = 0; m < 3; ++m) encoded.mods[m].x = positional_encode(sample.mods[m].x);
    CorruptedSample corrupted = apply_mask(encoded, *mask);
    for (int m = 0; m < 3; ++m) out[m] = corrupted.sample.mods[m].x;
  }
  return out;
}

double predict_sample(const ModelParams& params, const ModelConfig& cfg, const Sample& sample,
                      const MaskSet* mask, const Ablation& abl) {
  ad::Tape tape;
  ParamVars pv = insert_leaves(tape, params, /*trainable=*/false);
  ForwardResult fr =
      forward_model(tape, pv, prepare_inputs(sample, mask, cfg.pe_after_corruption), cfg, abl);
  return fr.y_hat.value()(0, 0);
}

}  // namespace gian

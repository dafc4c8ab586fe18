#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gian/encoding.hpp"
#include "gian/model.hpp"
#include "gian/rng.hpp"
#include "oracles.hpp"

using namespace gian;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.d_v = 3;
  cfg.d_a = 4;
  cfg.d_l = 2;
  cfg.d_proj = 4;
  cfg.d_h = 4;
  cfg.hyperedges = 3;
  cfg.fusion_layers = 2;
  return cfg;
}

Sample random_sample(CounterRng& rng, const ModelConfig& cfg, int T) {
  Sample s;
  for (Modality m : kModalities) {
    Matrix x(T, cfg.dim(m));
    for (std::size_t i = 0; i < x.size(); ++i) x.at(i) = rng.next_uniform(-1.0, 1.0);
    s.mods[static_cast<int>(m)] = ModalitySequence{m, std::move(x)};
  }
  s.label = rng.next_uniform(-2.0, 2.0);
  return s;
}

}  // namespace

TEST_CASE("flat view round-trips losslessly") {
  const ModelConfig cfg = small_config();
  const ModelParams p = init_params(cfg, 7);
  const std::vector<double> flat = p.flatten();
  CHECK(flat.size() == p.count());

  ModelParams q = init_params(cfg, 8);
  CHECK(q.flatten() != flat);
  q.unflatten(flat);
  CHECK(q.flatten() == flat);
  visit_tensors(q, [&](const std::string& name, const Matrix& m) {
    (void)name;
    CHECK(m.all_finite());
  });
}

TEST_CASE("initialization is deterministic in the seed") {
  const ModelConfig cfg = small_config();
  CHECK(init_params(cfg, 3).flatten() == init_params(cfg, 3).flatten());
  CHECK(init_params(cfg, 3).flatten() != init_params(cfg, 4).flatten());
}

TEST_CASE("per-edge attention multiplies the attention sets") {
  ModelConfig cfg = small_config();
  const std::size_t shared = init_params(cfg, 1).amgm.sets.size();
  cfg.per_edge_attention = true;
  const std::size_t per_edge = init_params(cfg, 1).amgm.sets.size();
  CHECK(shared == 1);
  CHECK(per_edge == 6);
}

TEST_CASE("forward produces exactly seven stage tensors and a scalar") {
  const ModelConfig cfg = small_config();
  const ModelParams params = init_params(cfg, 11);
  CounterRng rng(1);
  const Sample s = random_sample(rng, cfg, 5);

  ad::Tape tape;
  const ParamVars pv = insert_leaves(tape, params);
  const ForwardResult fr =
      forward_model(tape, pv, prepare_inputs(s, nullptr, true), cfg);

  int stage_tensors = 0;
  for (const auto& v : fr.stages.f_h) {
    CHECK(v.valid());
    CHECK(v.rows() == 5);
    CHECK(v.cols() == cfg.d_h);
    ++stage_tensors;
  }
  for (const auto& v : fr.stages.f_d) {
    CHECK(v.valid());
    ++stage_tensors;
  }
  CHECK(fr.stages.fused.valid());
  ++stage_tensors;
  CHECK(stage_tensors == 7);
  CHECK(fr.stages.fused.rows() == 15);
  CHECK(fr.y_hat.rows() == 1);
  CHECK(fr.y_hat.cols() == 1);
}

TEST_CASE("no_amgm passes hypergraph features straight through") {
  const ModelConfig cfg = small_config();
  const ModelParams params = init_params(cfg, 12);
  CounterRng rng(2);
  const Sample s = random_sample(rng, cfg, 4);

  ad::Tape tape;
  const ParamVars pv = insert_leaves(tape, params);
  Ablation abl;
  abl.no_amgm = true;
  const ForwardResult fr = forward_model(tape, pv, prepare_inputs(s, nullptr, true), cfg, abl);
  for (int m = 0; m < 3; ++m) {
    CHECK(fr.stages.f_d[m].id == fr.stages.f_h[m].id);
  }
}

TEST_CASE("no_lthm reduces the first stage to a linear projection") {
  const ModelConfig cfg = small_config();
  const ModelParams params = init_params(cfg, 13);
  CounterRng rng(3);
  const Sample s = random_sample(rng, cfg, 4);
  const auto inputs = prepare_inputs(s, nullptr, true);

  ad::Tape tape;
  const ParamVars pv = insert_leaves(tape, params);
  Ablation abl;
  abl.no_lthm = true;
  const ForwardResult fr = forward_model(tape, pv, inputs, cfg, abl);
  for (int m = 0; m < 3; ++m) {
    CHECK(max_abs_diff(fr.stages.f_h[m].value(),
                       oracle::matmul(inputs[m], params.lthm[m].theta)) <= 1e-12);
  }
}

TEST_CASE("combined identity ablations still emit a scalar prediction") {
  const ModelConfig cfg = small_config();
  const ModelParams params = init_params(cfg, 14);
  CounterRng rng(4);
  const Sample s = random_sample(rng, cfg, 3);
  Ablation abl;
  abl.no_lthm = true;
  abl.no_amgm = true;
  const double y = predict_sample(params, cfg, s, nullptr, abl);
  CHECK(std::isfinite(y));
}

TEST_CASE("forward validates input widths against the config") {
  const ModelConfig cfg = small_config();
  const ModelParams params = init_params(cfg, 15);
  ad::Tape tape;
  const ParamVars pv = insert_leaves(tape, params);
  std::array<Matrix, 3> bad = {Matrix::zeros(4, cfg.d_v + 1), Matrix::zeros(4, cfg.d_a),
                               Matrix::zeros(4, cfg.d_l)};
  CHECK_THROWS_AS(forward_model(tape, pv, bad, cfg), std::invalid_argument);
}

TEST_CASE("corruption/encoding order flag changes the corrupted rows") {
  const ModelConfig cfg = small_config();
  CounterRng rng(5);
  const Sample s = random_sample(rng, cfg, 6);
  const MaskSet mask = make_mask({Pattern::TemporalMissing, 0.5, 9}, 6);

  const auto after = prepare_inputs(s, &mask, /*pe_after_corruption=*/true);
  const auto before = prepare_inputs(s, &mask, /*pe_after_corruption=*/false);

  const Matrix pe = positional_table(6, cfg.d_v);
  for (int t = 0; t < 6; ++t) {
    for (int c = 0; c < cfg.d_v; ++c) {
      if (mask.masks[0][t]) {
        CHECK(after[0](t, c) == pe(t, c));   // zeroed then encoded
        CHECK(before[0](t, c) == 0.0);       // encoded then zeroed
      } else {
        CHECK(after[0](t, c) == before[0](t, c));
      }
    }
  }
}

TEST_CASE("frozen hyperedge weights zero their gradient segment") {
  ModelConfig cfg = small_config();
  cfg.learn_hyperedge_weights = false;
  const ModelParams params = init_params(cfg, 16);
  CounterRng rng(6);
  const Sample s = random_sample(rng, cfg, 4);

  ad::Tape tape;
  const ParamVars pv = insert_leaves(tape, params);
  const ForwardResult fr = forward_model(tape, pv, prepare_inputs(s, nullptr, true), cfg);
  tape.backward(fr.y_hat);
  const std::vector<double> grads = collect_grads(pv, cfg);

  std::size_t off = 0;
  visit_tensors(params, [&](const std::string& name, const Matrix& m) {
    if (name.ends_with(".w")) {
      for (std::size_t i = 0; i < m.size(); ++i) CHECK(grads[off + i] == 0.0);
    }
    off += m.size();
  });
  CHECK(off == grads.size());
}

TEST_CASE("config validation rejects bad dimensions") {
  ModelConfig cfg = small_config();
  cfg.d_h = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.temperature = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

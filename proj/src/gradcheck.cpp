#include "gian/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "gian/autodiff.hpp"
#include "gian/corruption.hpp"
#include "gian/model.hpp"
#include "gian/rng.hpp"
#include "gian/training.hpp"

namespace gian {

namespace {

constexpr double kKinkMargin = 1e-3;
constexpr int kMaxResamples = 64;

Matrix random_matrix(CounterRng& rng, int r, int c, double lo, double hi) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.at(i) = rng.next_uniform(lo, hi);
  return m;
}

// Evaluates f once and reports the smallest kink distance seen on the tape.
double forward_margin(const ad::ScalarFn& f, const std::vector<Matrix>& point) {
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  for (const Matrix& m : point) leaves.push_back(tape.leaf(m));
  f(tape, leaves);
  return tape.kink_margin();
}

// One op-registry case: leaves sampled by `sample`, scalarized via a random
// constant weighting so the whole Jacobian is exercised.
struct OpCase {
  std::string name;
  std::function<std::vector<Matrix>(CounterRng&)> sample;
  std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&, CounterRng&)> build;
};

ad::Var weighted_sum(ad::Var v, CounterRng& rng) {
  Matrix w = random_matrix(rng, v.rows(), v.cols(), -1.0, 1.0);
  return ad::sum(ad::mul(v, v.tape->constant(w, "probe_weights")));
}

double check_op_registry(std::uint64_t seed) {
  using ad::Var;
  using Leaves = std::vector<ad::Var>;

  auto two_same = [](CounterRng& rng) {
    return std::vector<Matrix>{random_matrix(rng, 3, 4, -2.0, 2.0),
                               random_matrix(rng, 3, 4, -2.0, 2.0)};
  };
  auto one_3x4 = [](CounterRng& rng) {
    return std::vector<Matrix>{random_matrix(rng, 3, 4, -2.0, 2.0)};
  };
  auto one_positive = [](CounterRng& rng) {
    return std::vector<Matrix>{random_matrix(rng, 3, 4, 0.3, 2.5)};
  };

  const std::vector<OpCase> cases = {
      {"matmul",
       [](CounterRng& rng) {
         return std::vector<Matrix>{random_matrix(rng, 3, 4, -2.0, 2.0),
                                    random_matrix(rng, 4, 2, -2.0, 2.0)};
       },
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::matmul(l[0], l[1]), rng);
       }},
      {"transpose", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::transpose(l[0]), rng);
       }},
      {"add", two_same,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::add(l[0], l[1]), rng);
       }},
      {"sub", two_same,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::sub(l[0], l[1]), rng);
       }},
      {"mul", two_same,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::mul(l[0], l[1]), rng);
       }},
      {"relu", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::relu(l[0]), rng);
       }},
      {"sigmoid", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::sigmoid(l[0]), rng);
       }},
      {"exp", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::exp(l[0]), rng);
       }},
      {"log", one_positive,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::log(l[0]), rng);
       }},
      {"log_clamped", one_positive,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::log_clamped(l[0]), rng);
       }},
      {"abs", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::abs(l[0]), rng);
       }},
      {"scale", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::scale(l[0], 1.7), rng);
       }},
      {"add_scalar", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::add_scalar(l[0], -0.4), rng);
       }},
      {"rsqrt_clamp0", one_positive,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::rsqrt_clamp0(l[0]), rng);
       }},
      {"sqrt_clamp0", one_positive,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::sqrt_clamp0(l[0]), rng);
       }},
      {"inv_clamp0", one_positive,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::inv_clamp0(l[0]), rng);
       }},
      {"softmax_rows", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::softmax_rows(l[0]), rng);
       }},
      {"sum", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng&) { return ad::sum(l[0]); }},
      {"mean", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng&) { return ad::mean(l[0]); }},
      {"row_mean", one_3x4,
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::row_mean(l[0]), rng);
       }},
      {"concat_rows",
       [](CounterRng& rng) {
         return std::vector<Matrix>{random_matrix(rng, 2, 3, -2.0, 2.0),
                                    random_matrix(rng, 4, 3, -2.0, 2.0)};
       },
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::concat_rows({l[0], l[1]}), rng);
       }},
      {"mul_colvec",
       [](CounterRng& rng) {
         return std::vector<Matrix>{random_matrix(rng, 3, 4, -2.0, 2.0),
                                    random_matrix(rng, 3, 1, -2.0, 2.0)};
       },
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::mul_colvec(l[0], l[1]), rng);
       }},
      {"mul_rowvec",
       [](CounterRng& rng) {
         return std::vector<Matrix>{random_matrix(rng, 3, 4, -2.0, 2.0),
                                    random_matrix(rng, 1, 4, -2.0, 2.0)};
       },
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::mul_rowvec(l[0], l[1]), rng);
       }},
      {"add_colvec",
       [](CounterRng& rng) {
         return std::vector<Matrix>{random_matrix(rng, 3, 4, -2.0, 2.0),
                                    random_matrix(rng, 3, 1, -2.0, 2.0)};
       },
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::add_colvec(l[0], l[1]), rng);
       }},
      {"add_rowvec",
       [](CounterRng& rng) {
         return std::vector<Matrix>{random_matrix(rng, 3, 4, -2.0, 2.0),
                                    random_matrix(rng, 1, 4, -2.0, 2.0)};
       },
       [&](ad::Tape&, const Leaves& l, CounterRng& rng) {
         return weighted_sum(ad::add_rowvec(l[0], l[1]), rng);
       }},
  };

  double worst = 0.0;
  for (const OpCase& c : cases) {
    for (int point = 0; point < 10; ++point) {
      double rel = 0.0;
      bool done = false;
      for (int attempt = 0; attempt < kMaxResamples && !done; ++attempt) {
        CounterRng rng(derive_seed(derive_seed(seed, std::hash<std::string>{}(c.name)),
                                   derive_seed(point, attempt)));
        const std::vector<Matrix> leaves = c.sample(rng);
        CounterRng weight_rng = rng;  // weights drawn after the leaves
        const ad::ScalarFn f = [&](ad::Tape& tape, const std::vector<ad::Var>& l) {
          CounterRng local = weight_rng;
          return c.build(tape, l, local);
        };
        if (forward_margin(f, leaves) < kKinkMargin) continue;
        rel = ad::grad_check(f, leaves);
        done = true;
      }
      if (!done) throw std::runtime_error("gradcheck: could not find a kink-free point for " +
                                          c.name);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

LthmVars lthm_leaves(const std::vector<ad::Var>& l, std::size_t off) {
  return LthmVars{l[off], l[off + 1], l[off + 2], l[off + 3], l[off + 4]};
}

double check_lthm(std::uint64_t seed) {
  const int T = 4, d_m = 3, d_proj = 4, M = 3, d_h = 3;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    CounterRng rng(derive_seed(derive_seed(seed, 0x6C74686D), attempt));
    const Matrix x = random_matrix(rng, T, d_m, -1.0, 1.0);
    std::vector<Matrix> point = {
        random_matrix(rng, d_m, d_proj, -0.7, 0.7), random_matrix(rng, 1, d_proj, 0.5, 1.5),
        random_matrix(rng, d_m, M, -0.7, 0.7), random_matrix(rng, d_m, d_h, -0.7, 0.7),
        random_matrix(rng, 1, M, 0.5, 1.5)};
    const ad::ScalarFn f = [&](ad::Tape& tape, const std::vector<ad::Var>& l) {
      ad::Var xv = tape.constant(x, "x");
      return ad::sum(lthm_forward(xv, lthm_leaves(l, 0), LthmConfig{}));
    };
    if (forward_margin(f, point) < kKinkMargin) continue;
    return ad::grad_check(f, point);
  }
  throw std::runtime_error("gradcheck: no kink-free LTHM point found");
}

double check_amgm(std::uint64_t seed) {
  const int T = 3, d_h = 4;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    CounterRng rng(derive_seed(derive_seed(seed, 0x616D676D), attempt));
    std::array<Matrix, 3> feats;
    for (auto& f : feats) f = random_matrix(rng, T, d_h, -1.5, 1.5);
    std::vector<Matrix> point = {random_matrix(rng, d_h, d_h, -0.8, 0.8),
                                 random_matrix(rng, d_h, d_h, -0.8, 0.8),
                                 random_matrix(rng, d_h, d_h, -0.8, 0.8)};
    const ad::ScalarFn f = [&](ad::Tape& tape, const std::vector<ad::Var>& l) {
      AmgmVars vars{{AttnVars{l[0], l[1], l[2]}}};
      std::array<ad::Var, 3> nodes{tape.constant(feats[0], "fV"), tape.constant(feats[1], "fA"),
                                   tape.constant(feats[2], "fL")};
      auto out = amgm_forward(nodes, vars, AmgmConfig{});
      return ad::sum(ad::concat_rows({out[0], out[1], out[2]}));
    };
    if (forward_margin(f, point) < kKinkMargin) continue;
    return ad::grad_check(f, point);
  }
  throw std::runtime_error("gradcheck: no kink-free AMGM point found");
}

double check_fusion(std::uint64_t seed) {
  const int T = 3, d_h = 4, layers = 2;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    CounterRng rng(derive_seed(derive_seed(seed, 0x66757365), attempt));
    std::array<Matrix, 3> feats;
    for (auto& f : feats) f = random_matrix(rng, T, d_h, -1.0, 1.0);
    std::vector<Matrix> point;
    for (int l = 0; l < layers; ++l) {
      for (int i = 0; i < 4; ++i) point.push_back(random_matrix(rng, d_h, d_h, -0.6, 0.6));
      point.push_back(random_matrix(rng, d_h, 4 * d_h, -0.6, 0.6));
      point.push_back(random_matrix(rng, 4 * d_h, d_h, -0.6, 0.6));
      point.push_back(random_matrix(rng, 1, d_h, 0.8, 1.2));  // ln1 gain
      point.push_back(random_matrix(rng, 1, d_h, -0.2, 0.2)); // ln1 bias
      point.push_back(random_matrix(rng, 1, d_h, 0.8, 1.2));  // ln2 gain
      point.push_back(random_matrix(rng, 1, d_h, -0.2, 0.2)); // ln2 bias
    }
    const ad::ScalarFn f = [&](ad::Tape& tape, const std::vector<ad::Var>& l) {
      FusionVars fv;
      std::size_t off = 0;
      for (int layer = 0; layer < layers; ++layer) {
        fv.layers.push_back(FusionLayerVars{l[off], l[off + 1], l[off + 2], l[off + 3],
                                            l[off + 4], l[off + 5], l[off + 6], l[off + 7],
                                            l[off + 8], l[off + 9]});
        off += 10;
      }
      fv.head_w = tape.constant(Matrix::zeros(d_h, 1), "head_w");
      fv.head_b = tape.constant(Matrix::zeros(1, 1), "head_b");
      std::array<ad::Var, 3> nodes{tape.constant(feats[0], "fV"), tape.constant(feats[1], "fA"),
                                   tape.constant(feats[2], "fL")};
      return ad::sum(fuse(nodes, fv));
    };
    if (forward_margin(f, point) < kKinkMargin) continue;
    return ad::grad_check(f, point);
  }
  throw std::runtime_error("gradcheck: no kink-free fusion point found");
}

double check_losses(std::uint64_t seed) {
  const int T = 3, d = 4;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    CounterRng rng(derive_seed(derive_seed(seed, 0x6C6F7373), attempt));
    std::vector<Matrix> point = {
        random_matrix(rng, T, d, -2.0, 2.0),  // corrupt features
        random_matrix(rng, T, d, -2.0, 2.0),  // clean features
        random_matrix(rng, 1, 1, -2.0, 2.0),  // clean prediction
        random_matrix(rng, 1, 1, -2.0, 2.0),  // corrupt prediction
    };
    const double label = rng.next_uniform(-2.0, 2.0);
    const ad::ScalarFn f = [&](ad::Tape&, const std::vector<ad::Var>& l) {
      RefinementConfig cfg;
      cfg.teacher_stop_gradient = false;  // gradients through both sides
      ad::Var l_f = js_divergence(l[0], l[1]);
      ad::Var l_c = task_loss(l[2], l[3], label);
      return total_loss(l_c, l_f, cfg);
    };
    if (forward_margin(f, point) < kKinkMargin) continue;
    return ad::grad_check(f, point);
  }
  throw std::runtime_error("gradcheck: no kink-free loss point found");
}

double check_end_to_end(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.d_v = 3;
  cfg.d_a = 3;
  cfg.d_l = 3;
  cfg.d_proj = 4;
  cfg.d_h = 4;
  cfg.hyperedges = 3;
  cfg.fusion_layers = 1;
  // Near-uniform attention at initialization puts the lambda=1 filter right
  // on its relu kink; 0.8 keeps the threshold path active with real margin.
  cfg.lambda_attn = 0.8;
  const int T = 4;

  TrainConfig tcfg;
  // Stop-gradient intentionally drops the teacher path from the analytic
  // gradient, which finite differences would still see; check without it.
  tcfg.refinement.teacher_stop_gradient = false;

  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const std::uint64_t s = derive_seed(derive_seed(seed, 0x65326521), attempt);
    CounterRng rng(s);
    Sample sample;
    for (Modality m : kModalities) {
      sample.mods[static_cast<int>(m)] =
          ModalitySequence{m, random_matrix(rng, T, cfg.dim(m), -2.5, 2.5)};
    }
    sample.label = rng.next_uniform(-2.0, 2.0);
    const MaskSet mask = make_mask({Pattern::TemporalMissing, 0.5, derive_seed(s, 7)}, T);

    ModelParams params = init_params(cfg, derive_seed(s, 11));
    std::vector<Matrix> point;
    visit_tensors(params, [&](const std::string&, const Matrix& m) { point.push_back(m); });

    const ad::ScalarFn f = [&](ad::Tape& tape, const std::vector<ad::Var>& l) {
      ParamVars pv;
      pv.amgm.sets.resize(params.amgm.sets.size());
      pv.fusion.layers.resize(params.fusion.layers.size());
      std::size_t i = 0;
      visit_tensors(pv, [&](const std::string&, ad::Var& v) { v = l[i++]; });

      ForwardResult clean = forward_model(
          tape, pv, prepare_inputs(sample, nullptr, cfg.pe_after_corruption), cfg, {});
      ForwardResult corrupt = forward_model(
          tape, pv, prepare_inputs(sample, &mask, cfg.pe_after_corruption), cfg, {});
      ad::Var l_c = task_loss(clean.y_hat, corrupt.y_hat, sample.label);
      ad::Var l_f = refinement_loss(corrupt.stages, clean.stages, tcfg.refinement);
      return total_loss(l_c, l_f, tcfg.refinement);
    };
    if (forward_margin(f, point) < kKinkMargin) continue;

    // Random 32-coordinate subset across all parameters.
    ad::GradCheckOptions opts;
    CounterRng pick(derive_seed(s, 13));
    for (int c = 0; c < 32; ++c) {
      const int pi = static_cast<int>(pick.next_below(point.size()));
      opts.subset.emplace_back(pi, pick.next_below(point[pi].size()));
    }
    return ad::grad_check(f, point, opts);
  }
  throw std::runtime_error("gradcheck: no kink-free end-to-end point found");
}

}  // namespace

std::vector<GradCheckReport> run_gradcheck_suites(std::uint64_t seed) {
  std::vector<GradCheckReport> reports;
  const auto add = [&](const std::string& name, double rel, double threshold) {
    reports.push_back({name, rel, threshold, rel <= threshold});
  };
  add("autodiff_ops", check_op_registry(seed), 1e-5);
  add("lthm_soft", check_lthm(seed), 1e-4);
  add("amgm", check_amgm(seed), 1e-4);
  add("fusion", check_fusion(seed), 1e-4);
  add("losses", check_losses(seed), 1e-4);
  add("end_to_end", check_end_to_end(seed), 1e-4);
  return reports;
}

bool all_pass(const std::vector<GradCheckReport>& reports) {
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace gian

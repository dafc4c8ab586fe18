#include "gian/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gian/metrics.hpp"
#include "gian/rng.hpp"

namespace gian {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (alpha_train < 0.0 || alpha_train > 1.0) {
    throw std::invalid_argument("TrainConfig: alpha_train must lie in [0, 1]");
  }
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (early_stop_patience < 1) {
    throw std::invalid_argument("TrainConfig: early_stop_patience must be >= 1");
  }
  if (refinement.beta < 0.0 || refinement.beta > 1.0) {
    throw std::invalid_argument("TrainConfig: refinement beta must lie in [0, 1]");
  }
  if (refinement.lambda_loss < 0.0) {
    throw std::invalid_argument("TrainConfig: lambda_loss must be >= 0");
  }
}

std::vector<double> adam_step(const std::vector<double>& grad, AdamState& state,
                              const TrainConfig& cfg) {
  if (state.m.empty()) {
    state.m.assign(grad.size(), 0.0);
    state.v.assign(grad.size(), 0.0);
  }
  if (state.m.size() != grad.size()) {
    throw std::invalid_argument("adam_step: gradient size " + std::to_string(grad.size()) +
                                " does not match state size " + std::to_string(state.m.size()));
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  std::vector<double> delta(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    state.m[i] = cfg.adam_beta1 * state.m[i] + (1.0 - cfg.adam_beta1) * grad[i];
    state.v[i] = cfg.adam_beta2 * state.v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    delta[i] = -cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
  return delta;
}

namespace {

constexpr std::uint64_t kTrainMaskTag = 0x746D736B;  // "tmsk"
constexpr std::uint64_t kShuffleTag = 0x73687566;    // "shuf"
constexpr std::uint64_t kValTag = 0x76616C64;        // "vald"

}  // namespace

std::uint64_t train_mask_seed(std::uint64_t seed, int epoch, std::size_t sample_index,
                              bool fixed_masks) {
  const std::uint64_t e = fixed_masks ? 0 : static_cast<std::uint64_t>(epoch);
  return derive_seed(derive_seed(seed, kTrainMaskTag),
                     derive_seed(e, static_cast<std::uint64_t>(sample_index)));
}

LossBreakdown train_step(const std::vector<const Sample*>& batch,
                         const std::vector<std::uint64_t>& mask_seeds, ModelParams& params,
                         AdamState& opt, const ModelConfig& mcfg, const TrainConfig& tcfg) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  if (batch.size() != mask_seeds.size()) {
    throw std::invalid_argument("train_step: one mask seed per sample required");
  }

  ad::Tape tape;
  ParamVars pv = insert_leaves(tape, params, /*trainable=*/true);

  ad::Var sum_lc, sum_lf;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sample& s = *batch[i];
    const MaskSet mask =
        make_mask({Pattern::TemporalMissing, tcfg.alpha_train, mask_seeds[i]}, s.T());

    ForwardResult clean = forward_model(
        tape, pv, prepare_inputs(s, nullptr, mcfg.pe_after_corruption), mcfg, tcfg.ablation);
    ForwardResult corrupt = forward_model(
        tape, pv, prepare_inputs(s, &mask, mcfg.pe_after_corruption), mcfg, tcfg.ablation);

    ad::Var lc = task_loss(clean.y_hat, corrupt.y_hat, s.label);
    ad::Var lf = refinement_loss(corrupt.stages, clean.stages, tcfg.refinement);
    sum_lc = sum_lc.valid() ? ad::add(sum_lc, lc) : lc;
    sum_lf = sum_lf.valid() ? ad::add(sum_lf, lf) : lf;
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  ad::Var l_c = ad::scale(sum_lc, inv_n);
  ad::Var l_f = ad::scale(sum_lf, inv_n);
  ad::Var total = tcfg.ablation.no_strategy ? l_c : total_loss(l_c, l_f, tcfg.refinement);

  if (!std::isfinite(total.value()(0, 0))) {
    const auto [idx, name] = tape.first_non_finite();
    throw std::runtime_error("train_step: non-finite loss; first non-finite tensor is '" + name +
                             "' (tape record " + std::to_string(idx) + ")");
  }

  tape.backward(total);
  const std::vector<double> grads = collect_grads(pv, mcfg);
  const std::vector<double> delta = adam_step(grads, opt, tcfg);
  params.add_delta(delta);

  return {l_c.value()(0, 0), l_f.value()(0, 0), total.value()(0, 0)};
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  char line[320];
  for (const EpochRow& r : rows) {
    std::snprintf(line, sizeof(line),
                  "{\"epoch\":%d,\"train_loss\":%.17g,\"l_c\":%.17g,\"l_f\":%.17g,"
                  "\"val_mae\":%.17g,\"is_best\":%s}\n",
                  r.epoch, r.train_loss, r.l_c, r.l_f, r.val_mae, r.is_best ? "true" : "false");
    out += line;
  }
  return out;
}

FitResult fit(const std::vector<Sample>& train, const std::vector<Sample>& val,
              const ModelConfig& mcfg, const TrainConfig& tcfg) {
  mcfg.validate();
  tcfg.validate();
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  if (val.empty()) throw std::invalid_argument("fit: empty validation set");
  for (const Sample& s : train) {
    for (Modality m : kModalities) {
      if (s.x(m).cols() != mcfg.dim(m)) {
        throw std::invalid_argument(std::string("fit: training sample modality ") +
                                    modality_name(m) + " width " +
                                    std::to_string(s.x(m).cols()) + " does not match config " +
                                    std::to_string(mcfg.dim(m)));
      }
    }
  }

  FitResult result{init_params(mcfg, tcfg.seed), {}};
  if (tcfg.epochs == 0) return result;

  ModelParams params = result.params;
  AdamState opt;
  const EvalCorruption val_corruption{Pattern::TemporalMissing, tcfg.alpha_train,
                                      derive_seed(tcfg.seed, kValTag)};
  double best_mae = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    CounterRng shuffle_rng(derive_seed(derive_seed(tcfg.seed, kShuffleTag),
                                       static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0, lc_sum = 0.0, lf_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
      std::vector<const Sample*> batch;
      std::vector<std::uint64_t> seeds;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(&train[order[k]]);
        seeds.push_back(train_mask_seed(tcfg.seed, epoch, order[k], tcfg.fixed_masks));
      }
      const LossBreakdown lb = train_step(batch, seeds, params, opt, mcfg, tcfg);
      const double w = static_cast<double>(batch.size());
      loss_sum += lb.total * w;
      lc_sum += lb.l_c * w;
      lf_sum += lb.l_f * w;
      seen += batch.size();
    }

    const double val_mae =
        tcfg.alpha_train > 0.0
            ? evaluate(params, mcfg, val, val_corruption, tcfg.ablation).mae
            : evaluate(params, mcfg, val, std::nullopt, tcfg.ablation).mae;

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(seen);
    row.l_c = lc_sum / static_cast<double>(seen);
    row.l_f = lf_sum / static_cast<double>(seen);
    row.val_mae = val_mae;
    if (val_mae < best_mae) {
      best_mae = val_mae;
      result.params = params;
      epochs_without_improvement = 0;
      row.is_best = true;
    } else {
      ++epochs_without_improvement;
    }
    result.log.rows.push_back(row);
    if (epochs_without_improvement >= tcfg.early_stop_patience) break;
  }
  return result;
}

}  // namespace gian

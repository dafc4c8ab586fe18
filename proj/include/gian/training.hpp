#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gian/losses.hpp"
#include "gian/model.hpp"

namespace gian {

struct TrainConfig {
  double learning_rate = 0.002;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 50;
  int batch_size = 16;
  double alpha_train = 0.5;  // training-time temporal-missing ratio
  RefinementConfig refinement;
  std::uint64_t seed = 0;
  Ablation ablation;
  int early_stop_patience = 5;
  bool fixed_masks = false;  // reuse epoch-0 corruption masks every epoch

  void validate() const;
};

struct AdamState {
  std::vector<double> m, v;
  std::int64_t t = 0;
};

// Bias-corrected Adam; returns the parameter delta (apply by adding).
std::vector<double> adam_step(const std::vector<double>& grad, AdamState& state,
                              const TrainConfig& cfg);

struct LossBreakdown {
  double l_c = 0.0;
  double l_f = 0.0;  // reported even when no_strategy excludes it from total
  double total = 0.0;
};

// Training-time corruption mask seed for one sample. fixed_masks pins the
// epoch component to zero.
std::uint64_t train_mask_seed(std::uint64_t seed, int epoch, std::size_t sample_index,
                              bool fixed_masks);

// One dual-branch step over the batch: clean + temporal-missing corrupted
// forward passes with shared parameters, averaged L_c and L_f, one Adam
// update. mask_seeds holds one seed per batch entry.
LossBreakdown train_step(const std::vector<const Sample*>& batch,
                         const std::vector<std::uint64_t>& mask_seeds, ModelParams& params,
                         AdamState& opt, const ModelConfig& mcfg, const TrainConfig& tcfg);

struct EpochRow {
  int epoch = 0;
  double train_loss = 0.0;
  double l_c = 0.0;
  double l_f = 0.0;
  double val_mae = 0.0;
  bool is_best = false;
};

struct TrainLog {
  std::vector<EpochRow> rows;

  std::string to_jsonl() const;
};

struct FitResult {
  ModelParams params;  // best-validation checkpoint
  TrainLog log;
};

// Seeded epoch shuffling, per-sample per-epoch corruption masks, early stop
// on corrupted-validation MAE (patience epochs without strict improvement),
// best checkpoint kept.
FitResult fit(const std::vector<Sample>& train, const std::vector<Sample>& val,
              const ModelConfig& mcfg, const TrainConfig& tcfg);

}  // namespace gian

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gian/corruption.hpp"
#include "gian/model.hpp"

namespace gian {

struct MetricsReport {
  double mae = 0.0;
  double acc2 = 0.0;  // negative / non-negative agreement
  double f1 = 0.0;    // non-negative as the positive class
  int n = 0;
};

// Binary classes from the sign: value >= 0 is non-negative (positive class).
// Zero-denominator precision/recall/F1 are defined as 0.
MetricsReport compute_metrics(const std::vector<double>& preds,
                              const std::vector<double>& labels);

struct SweepCurve {
  std::vector<double> rates;   // strictly increasing, in [0, 1]
  std::vector<double> values;  // metric value per rate
  std::string metric_name;
  Pattern pattern = Pattern::TemporalMissing;
};

// Trapezoid aggregate sum_i (e_i + e_i+1)/2 * (r_i+1 - r_i); needs >= 2 points.
double auilc(const std::vector<double>& rates, const std::vector<double>& values);
double auilc(const SweepCurve& curve);

// The standard grid {0.0, 0.1, ..., 1.0}.
std::vector<double> default_rate_grid();

// Per-sample corruption seeded by derive_seed(seed, sample_index); a null
// corruption (no pattern) evaluates clean.
struct EvalCorruption {
  Pattern pattern = Pattern::TemporalMissing;
  double rate = 0.0;
  std::uint64_t seed = 0;
};

std::vector<double> predict_all(const ModelParams& params, const ModelConfig& cfg,
                                const std::vector<Sample>& samples,
                                const std::optional<EvalCorruption>& corruption,
                                const Ablation& abl = {});

MetricsReport evaluate(const ModelParams& params, const ModelConfig& cfg,
                       const std::vector<Sample>& samples,
                       const std::optional<EvalCorruption>& corruption,
                       const Ablation& abl = {});

struct SweepPoint {
  double rate = 0.0;
  MetricsReport metrics;
};

struct SweepResult {
  Pattern pattern = Pattern::TemporalMissing;
  std::vector<SweepPoint> points;
  double auilc_mae = 0.0;
  double auilc_acc2 = 0.0;
  double auilc_f1 = 0.0;

  SweepCurve curve(const std::string& metric_name) const;
};

// Rate 0 bypasses corruption entirely (clean evaluation).
SweepResult sweep(const ModelParams& params, const ModelConfig& cfg,
                  const std::vector<Sample>& samples, Pattern pattern,
                  const std::vector<double>& rates, std::uint64_t seed,
                  const Ablation& abl = {});

// CSV with one row per (pattern, rate) plus an `auilc` summary row per
// pattern. %.17g formatting so values round-trip exactly.
std::string sweep_csv(const std::vector<SweepResult>& results);

}  // namespace gian

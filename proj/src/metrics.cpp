#include "gian/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gian/rng.hpp"

namespace gian {

MetricsReport compute_metrics(const std::vector<double>& preds,
                              const std::vector<double>& labels) {
  if (preds.empty()) throw std::invalid_argument("compute_metrics: empty input");
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("compute_metrics: " + std::to_string(preds.size()) +
                                " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  const int n = static_cast<int>(preds.size());
  double abs_err = 0.0;
  int agree = 0, tp = 0, fp = 0, fn = 0;
  for (int i = 0; i < n; ++i) {
    abs_err += std::fabs(preds[i] - labels[i]);
    const bool pred_pos = preds[i] >= 0.0;
    const bool label_pos = labels[i] >= 0.0;
    if (pred_pos == label_pos) ++agree;
    if (pred_pos && label_pos) ++tp;
    if (pred_pos && !label_pos) ++fp;
    if (!pred_pos && label_pos) ++fn;
  }
  MetricsReport r;
  r.n = n;
  r.mae = abs_err / n;
  r.acc2 = static_cast<double>(agree) / n;
  const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return r;
}

double auilc(const std::vector<double>& rates, const std::vector<double>& values) {
  if (rates.size() != values.size()) {
    throw std::invalid_argument("auilc: rates/values length mismatch");
  }
  if (rates.size() < 2) throw std::invalid_argument("auilc: need at least 2 points");
  for (std::size_t i = 1; i < rates.size(); ++i) {
    if (!(rates[i] > rates[i - 1])) {
      throw std::invalid_argument("auilc: rates must be strictly increasing");
    }
  }
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
    area += 0.5 * (values[i] + values[i + 1]) * (rates[i + 1] - rates[i]);
  }
  return area;
}

double auilc(const SweepCurve& curve) { return auilc(curve.rates, curve.values); }

std::vector<double> default_rate_grid() {
  std::vector<double> rates;
  for (int i = 0; i <= 10; ++i) rates.push_back(i / 10.0);
  return rates;
}

std::vector<double> predict_all(const ModelParams& params, const ModelConfig& cfg,
                                const std::vector<Sample>& samples,
                                const std::optional<EvalCorruption>& corruption,
                                const Ablation& abl) {
  std::vector<double> preds;
  preds.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (corruption.has_value()) {
      const CorruptionSpec spec{corruption->pattern, corruption->rate,
                                derive_seed(corruption->seed, i)};
      const MaskSet mask = make_mask(spec, samples[i].T());
      preds.push_back(predict_sample(params, cfg, samples[i], &mask, abl));
    } else {
      preds.push_back(predict_sample(params, cfg, samples[i], nullptr, abl));
    }
  }
  return preds;
}

MetricsReport evaluate(const ModelParams& params, const ModelConfig& cfg,
                       const std::vector<Sample>& samples,
                       const std::optional<EvalCorruption>& corruption, const Ablation& abl) {
  std::vector<double> labels;
  labels.reserve(samples.size());
  for (const Sample& s : samples) labels.push_back(s.label);
  return compute_metrics(predict_all(params, cfg, samples, corruption, abl), labels);
}

SweepCurve SweepResult::curve(const std::string& metric_name) const {
  SweepCurve c;
  c.metric_name = metric_name;
  c.pattern = pattern;
  for (const SweepPoint& p : points) {
    c.rates.push_back(p.rate);
    if (metric_name == "mae") {
      c.values.push_back(p.metrics.mae);
    } else if (metric_name == "acc2") {
      c.values.push_back(p.metrics.acc2);
    } else if (metric_name == "f1") {
      c.values.push_back(p.metrics.f1);
    } else {
      throw std::invalid_argument("unknown metric '" + metric_name + "'");
    }
  }
  return c;
}

SweepResult sweep(const ModelParams& params, const ModelConfig& cfg,
                  const std::vector<Sample>& samples, Pattern pattern,
                  const std::vector<double>& rates, std::uint64_t seed, const Ablation& abl) {
  SweepResult result;
  result.pattern = pattern;
  for (double rate : rates) {
    std::optional<EvalCorruption> corruption;
    if (rate > 0.0) corruption = EvalCorruption{pattern, rate, seed};
    result.points.push_back({rate, evaluate(params, cfg, samples, corruption, abl)});
  }
  result.auilc_mae = auilc(result.curve("mae"));
  result.auilc_acc2 = auilc(result.curve("acc2"));
  result.auilc_f1 = auilc(result.curve("f1"));
  return result;
}

std::string sweep_csv(const std::vector<SweepResult>& results) {
  std::string out = "pattern,rate,mae,acc2,f1\n";
  char line[256];
  for (const SweepResult& r : results) {
    for (const SweepPoint& p : r.points) {
      std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%.17g\n", pattern_name(r.pattern),
                    p.rate, p.metrics.mae, p.metrics.acc2, p.metrics.f1);
      out += line;
    }
    std::snprintf(line, sizeof(line), "%s,auilc,%.17g,%.17g,%.17g\n", pattern_name(r.pattern),
                  r.auilc_mae, r.auilc_acc2, r.auilc_f1);
    out += line;
  }
  return out;
}

}  // namespace gian

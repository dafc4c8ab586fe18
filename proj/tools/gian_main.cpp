#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gian/config.hpp"
#include "gian/data_io.hpp"
#include "gian/gradcheck.hpp"
#include "gian/metrics.hpp"
#include "gian/model.hpp"
#include "gian/rng.hpp"
#include "gian/training.hpp"

namespace fs = std::filesystem;
using namespace gian;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitGradcheck = 3;

Ablation parse_ablation(const std::vector<std::string>& flags) {
  Ablation abl;
  for (const std::string& f : flags) {
    if (f == "no_lthm") {
      abl.no_lthm = true;
    } else if (f == "no_amgm") {
      abl.no_amgm = true;
    } else if (f == "no_strategy") {
      abl.no_strategy = true;
    } else {
      throw std::invalid_argument("unknown ablation '" + f +
                                  "' (expected no_lthm, no_amgm or no_strategy)");
    }
  }
  return abl;
}

void infer_dims(ModelConfig& cfg, int d_v, int d_a, int d_l) {
  if (cfg.d_v == 0) cfg.d_v = d_v;
  if (cfg.d_a == 0) cfg.d_a = d_a;
  if (cfg.d_l == 0) cfg.d_l = d_l;
  if (cfg.d_v != d_v || cfg.d_a != d_a || cfg.d_l != d_l) {
    throw std::invalid_argument("model dims " + std::to_string(cfg.d_v) + "/" +
                                std::to_string(cfg.d_a) + "/" + std::to_string(cfg.d_l) +
                                " do not match data dims " + std::to_string(d_v) + "/" +
                                std::to_string(d_a) + "/" + std::to_string(d_l));
  }
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed) {
  const auto root = load_config_file(config_path);
  SynthSpec spec = synth_spec_from_json(root);
  if (seed) spec.seed = *seed;
  SplitSpec splits = split_spec_from_json(root);
  splits.resolve(spec.n_samples);

  const Dataset pool = synth_generate(spec);
  fs::create_directories(out_dir);
  const Dataset train = slice_dataset(pool, 0, splits.train);
  const Dataset val = slice_dataset(pool, splits.train, splits.val);
  const Dataset test = slice_dataset(pool, splits.train + splits.val, splits.test);
  save_dataset(train, out_dir + "/train.gds");
  save_dataset(val, out_dir + "/val.gds");
  save_dataset(test, out_dir + "/test.gds");

  DatasetManifest manifest;
  manifest.train_n = splits.train;
  manifest.val_n = splits.val;
  manifest.test_n = splits.test;
  manifest.T = spec.T;
  manifest.d_v = spec.d_v;
  manifest.d_a = spec.d_a;
  manifest.d_l = spec.d_l;
  manifest.source = "synthetic (shared_signal_dim=" + std::to_string(spec.shared_signal_dim) +
                    ", noise_sigma=" + std::to_string(spec.noise_sigma) +
                    ", redundancy=" + std::to_string(spec.redundancy) +
                    ", seed=" + std::to_string(spec.seed) + ")";
  save_manifest(manifest, out_dir + "/manifest.json");
  std::printf("wrote %d/%d/%d samples to %s\n", splits.train, splits.val, splits.test,
              out_dir.c_str());
  return kExitOk;
}

int cmd_corrupt(const std::string& data_path, const std::string& pattern_str, double rate,
                std::uint64_t seed, const std::string& out_prefix) {
  const Pattern pattern = pattern_from_string(pattern_str);
  if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("rate must lie in [0, 1]");
  const Dataset input = load_dataset(data_path);

  Dataset corrupted = input;
  std::vector<MaskSet> masks;
  masks.reserve(input.samples.size());
  for (std::size_t i = 0; i < input.samples.size(); ++i) {
    const MaskSet mask = make_mask({pattern, rate, derive_seed(seed, i)}, input.T);
    corrupted.samples[i] = apply_mask(input.samples[i], mask).sample;
    masks.push_back(mask);
  }
  save_dataset(corrupted, out_prefix + ".gds");
  save_masks(masks, out_prefix + ".gmask");
  std::printf("wrote %zu corrupted samples to %s.gds (+ %s.gmask)\n", corrupted.samples.size(),
              out_prefix.c_str(), out_prefix.c_str());
  return kExitOk;
}

std::vector<Sample> to_samples(const Dataset& d) { return d.samples; }

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir, const std::vector<std::string>& ablate,
              std::optional<std::uint64_t> seed) {
  const auto root = load_config_file(config_path);
  ModelConfig mcfg = model_config_from_json(root);
  TrainConfig tcfg = train_config_from_json(root);
  tcfg.ablation = parse_ablation(ablate);
  if (seed) tcfg.seed = *seed;

  const DatasetManifest manifest = load_manifest(data_dir + "/manifest.json");
  infer_dims(mcfg, manifest.d_v, manifest.d_a, manifest.d_l);
  mcfg.validate();
  tcfg.validate();

  const Dataset train = load_dataset(data_dir + "/train.gds");
  const Dataset val = load_dataset(data_dir + "/val.gds");

  const FitResult result = fit(to_samples(train), to_samples(val), mcfg, tcfg);

  fs::create_directories(out_dir);
  save_checkpoint(mcfg, result.params, out_dir + "/model.gckpt");
  write_text(out_dir + "/train_log.jsonl", result.log.to_jsonl());
  std::printf("trained %zu epochs; checkpoint and log written to %s\n", result.log.rows.size(),
              out_dir.c_str());
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& pattern_str, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("rate must lie in [0, 1]");
  auto [cfg, params] = load_checkpoint(ckpt_path);
  const Dataset data = load_dataset(data_path);
  infer_dims(cfg, data.d_v, data.d_a, data.d_l);

  std::optional<EvalCorruption> corruption;
  if (rate > 0.0) corruption = EvalCorruption{pattern_from_string(pattern_str), rate, seed};
  const MetricsReport r = evaluate(params, cfg, data.samples, corruption);
  std::printf("{\"mae\":%.17g,\"acc2\":%.17g,\"f1\":%.17g,\"n\":%d}\n", r.mae, r.acc2, r.f1, r.n);
  return kExitOk;
}

int cmd_sweep(const std::string& ckpt_path, const std::string& data_path,
              const std::string& config_path, const std::string& out_path) {
  const auto root = load_config_file(config_path);
  SweepSpec spec = sweep_spec_from_json(root);
  if (spec.rates.empty()) spec.rates = default_rate_grid();

  const auto [cfg, params] = load_checkpoint(ckpt_path);
  const Dataset data = load_dataset(data_path);

  std::vector<SweepResult> results;
  for (Pattern p : spec.patterns) {
    results.push_back(sweep(params, cfg, data.samples, p, spec.rates, spec.seed));
  }
  const std::string csv = sweep_csv(results);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text(out_path, csv);
    std::printf("wrote sweep CSV to %s\n", out_path.c_str());
  }
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed) {
  const auto reports = run_gradcheck_suites(seed);
  for (const auto& r : reports) {
    std::printf("%-14s max_rel_err=%.3e threshold=%.0e %s\n", r.module.c_str(), r.max_rel_err,
                r.threshold, r.pass ? "PASS" : "FAIL");
  }
  return all_pass(reports) ? kExitOk : kExitGradcheck;
}

int cmd_embed(const std::string& ckpt_path, const std::string& data_path,
              const std::string& out_prefix, const std::string& pattern_str, double rate,
              std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("rate must lie in [0, 1]");
  const auto [cfg, params] = load_checkpoint(ckpt_path);
  const Dataset data = load_dataset(data_path);

  Matrix embeddings;
  Matrix labels(static_cast<int>(data.samples.size()), 1);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    ad::Tape tape;
    ParamVars pv = insert_leaves(tape, params, /*trainable=*/false);
    std::optional<MaskSet> mask;
    if (rate > 0.0) {
      mask = make_mask({pattern_from_string(pattern_str), rate, derive_seed(seed, i)}, s.T());
    }
    const ForwardResult fr = forward_model(
        tape, pv, prepare_inputs(s, mask ? &*mask : nullptr, cfg.pe_after_corruption), cfg);
    const Matrix& fused = fr.stages.fused.value();
    if (embeddings.rows() == 0) {
      embeddings = Matrix(static_cast<int>(data.samples.size()),
                          fused.rows() * fused.cols());
    }
    for (std::size_t e = 0; e < fused.size(); ++e) {
      embeddings(static_cast<int>(i), static_cast<int>(e)) = fused.at(e);
    }
    labels(static_cast<int>(i), 0) = s.label;
  }
  save_tensor(embeddings, out_prefix + "_embeddings.gten");
  save_tensor(labels, out_prefix + "_labels.gten");
  std::printf("wrote %dx%d embeddings to %s_embeddings.gten\n", embeddings.rows(),
              embeddings.cols(), out_prefix.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gian: graph-based interaction augmentation network for robust multimodal "
               "sentiment regression"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, ckpt_path, pattern = "TM";
  double rate = 0.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> ablate;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--config", config_path, "JSON config file");
  synth->add_option("--out", out_path, "output directory")->required();
  synth->add_option("--seed", seed, "override the generator seed")
      ->each([&](const std::string&) { seed_set = true; });

  auto* corrupt = app.add_subcommand("corrupt", "apply a corruption pattern to a dataset");
  corrupt->add_option("--data", data_path, "input .gds file")->required();
  corrupt->add_option("--pattern", pattern, "RM, TM or STM");
  corrupt->add_option("--rate", rate, "imperfect ratio in [0, 1]")->required();
  corrupt->add_option("--seed", seed, "corruption seed");
  corrupt->add_option("--out", out_path, "output prefix (.gds and .gmask)")->required();

  auto* train = app.add_subcommand("train", "fit a model");
  train->add_option("--config", config_path, "JSON config file");
  train->add_option("--data", data_path, "dataset directory (manifest.json + splits)")
      ->required();
  train->add_option("--out", out_path, "output directory")->required();
  train->add_option("--ablate", ablate, "no_lthm, no_amgm and/or no_strategy");
  train->add_option("--seed", seed, "override the training seed")
      ->each([&](const std::string&) { seed_set = true; });

  auto* eval_cmd = app.add_subcommand("eval", "metrics at a single corruption setting");
  eval_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--data", data_path, "input .gds file")->required();
  eval_cmd->add_option("--pattern", pattern, "RM, TM or STM");
  eval_cmd->add_option("--rate", rate, "imperfect ratio in [0, 1]");
  eval_cmd->add_option("--seed", seed, "corruption seed");

  auto* sweep_cmd = app.add_subcommand("sweep", "full missing-rate grid per pattern");
  sweep_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  sweep_cmd->add_option("--data", data_path, "input .gds file")->required();
  sweep_cmd->add_option("--config", config_path, "JSON config file (sweep section)");
  sweep_cmd->add_option("--out", out_path, "CSV output path (default stdout)");

  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference verification of every module");
  gradcheck_cmd->add_option("--seed", seed, "probe seed");

  auto* embed = app.add_subcommand("embed", "dump fused representations per sample");
  embed->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  embed->add_option("--data", data_path, "input .gds file")->required();
  embed->add_option("--out", out_path, "output prefix")->required();
  embed->add_option("--pattern", pattern, "RM, TM or STM");
  embed->add_option("--rate", rate, "imperfect ratio in [0, 1]");
  embed->add_option("--seed", seed, "corruption seed");

  auto* defaults = app.add_subcommand("default-config", "print every default as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      return cmd_synth(config_path, out_path,
                       seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt);
    }
    if (*corrupt) return cmd_corrupt(data_path, pattern, rate, seed, out_path);
    if (*train) {
      return cmd_train(config_path, data_path, out_path, ablate,
                       seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt);
    }
    if (*eval_cmd) return cmd_eval(ckpt_path, data_path, pattern, rate, seed);
    if (*sweep_cmd) return cmd_sweep(ckpt_path, data_path, config_path, out_path);
    if (*gradcheck_cmd) return cmd_gradcheck(seed == 0 ? 2026 : seed);
    if (*embed) return cmd_embed(ckpt_path, data_path, out_path, pattern, rate, seed);
    if (*defaults) {
      std::cout << default_config_json().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}

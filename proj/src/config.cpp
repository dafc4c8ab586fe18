#include "gian/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace gian {

namespace {

using nlohmann::json;

void check_keys(const json& section, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : section.items()) {
    if (!allowed.contains(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "' in section '" + context +
                                  "'");
    }
  }
}

json section_or_empty(const json& root, const std::string& name) {
  if (!root.contains(name)) return json::object();
  if (!root.at(name).is_object()) {
    throw std::invalid_argument("config: section '" + name + "' must be an object");
  }
  return root.at(name);
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

void SplitSpec::resolve(int n_samples) {
  if (train == 0 && val == 0 && test == 0) {
    train = (n_samples * 3) / 4;
    val = (n_samples - train) / 2;
    test = n_samples - train - val;
  }
  if (train < 1 || val < 1 || test < 1) {
    throw std::invalid_argument("config: split sizes must be positive (got " +
                                std::to_string(train) + "/" + std::to_string(val) + "/" +
                                std::to_string(test) + ")");
  }
  if (train + val + test > n_samples) {
    throw std::invalid_argument("config: splits sum to " +
                                std::to_string(train + val + test) + " but only " +
                                std::to_string(n_samples) + " samples are generated");
  }
}

json default_config_json() {
  const SynthSpec synth;
  const ModelConfig model;
  const TrainConfig train;
  json j;
  j["synth"] = {{"n_samples", synth.n_samples},
                {"T", synth.T},
                {"d_v", synth.d_v},
                {"d_a", synth.d_a},
                {"d_l", synth.d_l},
                {"shared_signal_dim", synth.shared_signal_dim},
                {"noise_sigma", synth.noise_sigma},
                {"redundancy", synth.redundancy},
                {"latent_smoothness", synth.latent_smoothness},
                {"seed", synth.seed},
                {"split_train", 0},
                {"split_val", 0},
                {"split_test", 0}};
  j["model"] = {{"d_v", 0},
                {"d_a", 0},
                {"d_l", 0},
                {"d_proj", model.d_proj},
                {"d_h", model.d_h},
                {"hyperedges", model.hyperedges},
                {"fusion_layers", model.fusion_layers},
                {"temperature", model.temperature},
                {"hard_incidence", model.hard_incidence},
                {"eq2_literal", model.eq2_literal},
                {"lambda_attn", model.lambda_attn},
                {"per_edge_attention", model.per_edge_attention},
                {"learn_hyperedge_weights", model.learn_hyperedge_weights},
                {"pe_after_corruption", model.pe_after_corruption}};
  j["train"] = {{"learning_rate", train.learning_rate},
                {"adam_beta1", train.adam_beta1},
                {"adam_beta2", train.adam_beta2},
                {"adam_eps", train.adam_eps},
                {"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"alpha_train", train.alpha_train},
                {"beta", train.refinement.beta},
                {"lambda_loss", train.refinement.lambda_loss},
                {"teacher_stop_gradient", train.refinement.teacher_stop_gradient},
                {"divergence", "js"},
                {"seed", train.seed},
                {"early_stop_patience", train.early_stop_patience},
                {"fixed_masks", train.fixed_masks}};
  j["eval"] = {{"pattern", "TM"}, {"rate", 0.0}, {"seed", 0}};
  j["sweep"] = {{"patterns", json::array({"RM", "TM", "STM"})},
                {"rates", json::array()},
                {"seed", 0}};
  return j;
}

SynthSpec synth_spec_from_json(const json& root) {
  const json j = section_or_empty(root, "synth");
  check_keys(j,
             {"n_samples", "T", "d_v", "d_a", "d_l", "shared_signal_dim", "noise_sigma",
              "redundancy", "latent_smoothness", "seed", "split_train", "split_val",
              "split_test"},
             "synth");
  SynthSpec s;
  s.n_samples = get_or(j, "n_samples", s.n_samples);
  s.T = get_or(j, "T", s.T);
  s.d_v = get_or(j, "d_v", s.d_v);
  s.d_a = get_or(j, "d_a", s.d_a);
  s.d_l = get_or(j, "d_l", s.d_l);
  s.shared_signal_dim = get_or(j, "shared_signal_dim", s.shared_signal_dim);
  s.noise_sigma = get_or(j, "noise_sigma", s.noise_sigma);
  s.redundancy = get_or(j, "redundancy", s.redundancy);
  s.latent_smoothness = get_or(j, "latent_smoothness", s.latent_smoothness);
  s.seed = get_or(j, "seed", s.seed);
  s.validate();
  return s;
}

SplitSpec split_spec_from_json(const json& root) {
  const json j = section_or_empty(root, "synth");
  SplitSpec s;
  s.train = get_or(j, "split_train", 0);
  s.val = get_or(j, "split_val", 0);
  s.test = get_or(j, "split_test", 0);
  return s;
}

ModelConfig model_config_from_json(const json& root) {
  const json j = section_or_empty(root, "model");
  check_keys(j,
             {"d_v", "d_a", "d_l", "d_proj", "d_h", "hyperedges", "fusion_layers", "temperature",
              "hard_incidence", "eq2_literal", "lambda_attn", "per_edge_attention",
              "learn_hyperedge_weights", "pe_after_corruption"},
             "model");
  ModelConfig m;
  m.d_v = get_or(j, "d_v", 0);
  m.d_a = get_or(j, "d_a", 0);
  m.d_l = get_or(j, "d_l", 0);
  m.d_proj = get_or(j, "d_proj", m.d_proj);
  m.d_h = get_or(j, "d_h", m.d_h);
  m.hyperedges = get_or(j, "hyperedges", m.hyperedges);
  m.fusion_layers = get_or(j, "fusion_layers", m.fusion_layers);
  m.temperature = get_or(j, "temperature", m.temperature);
  m.hard_incidence = get_or(j, "hard_incidence", m.hard_incidence);
  m.eq2_literal = get_or(j, "eq2_literal", m.eq2_literal);
  m.lambda_attn = get_or(j, "lambda_attn", m.lambda_attn);
  m.per_edge_attention = get_or(j, "per_edge_attention", m.per_edge_attention);
  m.learn_hyperedge_weights = get_or(j, "learn_hyperedge_weights", m.learn_hyperedge_weights);
  m.pe_after_corruption = get_or(j, "pe_after_corruption", m.pe_after_corruption);
  return m;  // dims may still be 0 (inferred from data); validate at use
}

TrainConfig train_config_from_json(const json& root) {
  const json j = section_or_empty(root, "train");
  check_keys(j,
             {"learning_rate", "adam_beta1", "adam_beta2", "adam_eps", "epochs", "batch_size",
              "alpha_train", "beta", "lambda_loss", "teacher_stop_gradient", "divergence", "seed",
              "early_stop_patience", "fixed_masks"},
             "train");
  TrainConfig t;
  t.learning_rate = get_or(j, "learning_rate", t.learning_rate);
  t.adam_beta1 = get_or(j, "adam_beta1", t.adam_beta1);
  t.adam_beta2 = get_or(j, "adam_beta2", t.adam_beta2);
  t.adam_eps = get_or(j, "adam_eps", t.adam_eps);
  t.epochs = get_or(j, "epochs", t.epochs);
  t.batch_size = get_or(j, "batch_size", t.batch_size);
  t.alpha_train = get_or(j, "alpha_train", t.alpha_train);
  t.refinement.beta = get_or(j, "beta", t.refinement.beta);
  t.refinement.lambda_loss = get_or(j, "lambda_loss", t.refinement.lambda_loss);
  t.refinement.teacher_stop_gradient =
      get_or(j, "teacher_stop_gradient", t.refinement.teacher_stop_gradient);
  const std::string div = get_or<std::string>(j, "divergence", "js");
  if (div == "js") {
    t.refinement.divergence = Divergence::js;
  } else if (div == "kl") {
    t.refinement.divergence = Divergence::kl;
  } else {
    throw std::invalid_argument("config: divergence must be 'js' or 'kl', got '" + div + "'");
  }
  t.seed = get_or(j, "seed", t.seed);
  t.early_stop_patience = get_or(j, "early_stop_patience", t.early_stop_patience);
  t.fixed_masks = get_or(j, "fixed_masks", t.fixed_masks);
  t.validate();
  return t;
}

EvalCorruption eval_corruption_from_json(const json& root) {
  const json j = section_or_empty(root, "eval");
  check_keys(j, {"pattern", "rate", "seed"}, "eval");
  EvalCorruption e;
  e.pattern = pattern_from_string(get_or<std::string>(j, "pattern", "TM"));
  e.rate = get_or(j, "rate", 0.0);
  e.seed = get_or(j, "seed", std::uint64_t{0});
  if (e.rate < 0.0 || e.rate > 1.0) {
    throw std::invalid_argument("config: eval rate must lie in [0, 1]");
  }
  return e;
}

SweepSpec sweep_spec_from_json(const json& root) {
  const json j = section_or_empty(root, "sweep");
  check_keys(j, {"patterns", "rates", "seed"}, "sweep");
  SweepSpec s;
  if (j.contains("patterns")) {
    s.patterns.clear();
    for (const auto& p : j.at("patterns")) {
      s.patterns.push_back(pattern_from_string(p.get<std::string>()));
    }
    if (s.patterns.empty()) throw std::invalid_argument("config: sweep patterns are empty");
  }
  if (j.contains("rates")) {
    for (const auto& r : j.at("rates")) s.rates.push_back(r.get<double>());
  }
  s.seed = get_or(j, "seed", s.seed);
  return s;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace gian

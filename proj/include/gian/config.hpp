#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "gian/data_io.hpp"
#include "gian/metrics.hpp"
#include "gian/model.hpp"
#include "gian/training.hpp"

namespace gian {

struct SplitSpec {
  int train = 0, val = 0, test = 0;  // all zero => 75 / 12.5 / 12.5 split

  void resolve(int n_samples);  // fills zeros and validates the sum
};

struct SweepSpec {
  std::vector<Pattern> patterns = {Pattern::RandomMissing, Pattern::TemporalMissing,
                                   Pattern::StructuralTemporalMissing};
  std::vector<double> rates;  // empty => default grid
  std::uint64_t seed = 0;
};

// Every tunable with its default, as written by `default-config`.
nlohmann::json default_config_json();

// Each reader applies defaults, then the file's section, and rejects unknown
// keys. Missing sections mean "all defaults".
SynthSpec synth_spec_from_json(const nlohmann::json& root);
SplitSpec split_spec_from_json(const nlohmann::json& root);
ModelConfig model_config_from_json(const nlohmann::json& root);
TrainConfig train_config_from_json(const nlohmann::json& root);
EvalCorruption eval_corruption_from_json(const nlohmann::json& root);
SweepSpec sweep_spec_from_json(const nlohmann::json& root);

nlohmann::json load_config_file(const std::string& path);  // "" => empty object

}  // namespace gian

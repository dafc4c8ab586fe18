#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gian/model.hpp"
#include "gian/types.hpp"

namespace gian {

// Synthetic multimodal regression data with a known shared latent: a
// shared_signal_dim x T latent z drives the label, and a redundancy
// fraction of every modality's dims carries copies of z, so any surviving
// modality can in principle recover the label. Rows of z follow a
// stationary AR(1) with coefficient latent_smoothness, so the label-bearing
// temporal mean is also encoded in the trajectory shape and masked steps
// can be inferred from their context.
struct SynthSpec {
  int n_samples = 512;
  int T = 12;
  int d_v = 8, d_a = 6, d_l = 10;
  int shared_signal_dim = 3;
  double noise_sigma = 0.3;
  double redundancy = 0.6;
  double latent_smoothness = 0.9;  // AR(1) coefficient in [0, 1)
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  int T = 0;
  int d_v = 0, d_a = 0, d_l = 0;
  std::vector<Sample> samples;

  int dim(Modality m) const {
    switch (m) {
      case Modality::V: return d_v;
      case Modality::A: return d_a;
      case Modality::L: return d_l;
    }
    return 0;
  }
  std::size_t size() const { return samples.size(); }
};

Dataset synth_generate(const SynthSpec& spec);

// Contiguous sub-range [start, start + count).
Dataset slice_dataset(const Dataset& d, std::size_t start, std::size_t count);

// Distinct failure classes for the binary readers.
class FormatError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, bad_version, truncated, bad_checksum, shape_mismatch };

  FormatError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// All formats: fixed little-endian layout, header validated against the file
// size before the payload is allocated, FNV-1a 64 checksum over every
// preceding byte at the tail. Layouts are documented in the README.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

void save_masks(const std::vector<MaskSet>& masks, const std::string& path);
std::vector<MaskSet> load_masks(const std::string& path);

void save_checkpoint(const ModelConfig& cfg, const ModelParams& params, const std::string& path);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path);

void save_tensor(const Matrix& m, const std::string& path);
Matrix load_tensor(const std::string& path);

struct DatasetManifest {
  int format_version = 1;
  int train_n = 0, val_n = 0, test_n = 0;
  int T = 0;
  int d_v = 0, d_a = 0, d_l = 0;
  std::string source;  // generator description or external-source note
};

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

}  // namespace gian

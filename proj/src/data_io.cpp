#include "gian/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gian/rng.hpp"

namespace gian {

void SynthSpec::validate() const {
  if (n_samples < 1) throw std::invalid_argument("SynthSpec: n_samples must be >= 1");
  if (T < 1) throw std::invalid_argument("SynthSpec: T must be >= 1");
  if (d_v < 1 || d_a < 1 || d_l < 1) throw std::invalid_argument("SynthSpec: dims must be >= 1");
  if (shared_signal_dim < 1) {
    throw std::invalid_argument("SynthSpec: shared_signal_dim must be >= 1");
  }
  if (d_v < shared_signal_dim || d_a < shared_signal_dim || d_l < shared_signal_dim) {
    throw std::invalid_argument("SynthSpec: every modality dim must be >= shared_signal_dim");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("SynthSpec: noise_sigma must be >= 0");
  if (redundancy < 0.0 || redundancy > 1.0) {
    throw std::invalid_argument("SynthSpec: redundancy must lie in [0, 1]");
  }
  if (latent_smoothness < 0.0 || latent_smoothness >= 1.0) {
    throw std::invalid_argument("SynthSpec: latent_smoothness must lie in [0, 1)");
  }
}

Dataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  Dataset d;
  d.T = spec.T;
  d.d_v = spec.d_v;
  d.d_a = spec.d_a;
  d.d_l = spec.d_l;
  d.samples.reserve(spec.n_samples);

  const int k = spec.shared_signal_dim;
  const double rho = spec.latent_smoothness;
  // Calibrate the label scale so scale * mean(z) has standard deviation 1.5:
  // rows are independent stationary AR(1) with unit marginal variance, so
  // var(mean) = sum_ij rho^|i-j| / (k T^2).
  double cov_sum = 0.0;
  for (int i = 0; i < spec.T; ++i) {
    for (int j = 0; j < spec.T; ++j) cov_sum += std::pow(rho, std::abs(i - j));
  }
  const double label_scale =
      1.5 / std::sqrt(cov_sum / (static_cast<double>(k) * spec.T * spec.T));
  const double innovation = std::sqrt(1.0 - rho * rho);

  for (int i = 0; i < spec.n_samples; ++i) {
    CounterRng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));

    Matrix z(k, spec.T);
    double z_sum = 0.0;
    for (int r = 0; r < k; ++r) {
      for (int t = 0; t < spec.T; ++t) {
        const double eps = rng.next_gaussian();
        z(r, t) = t == 0 ? eps : rho * z(r, t - 1) + innovation * eps;
        z_sum += z(r, t);
      }
    }
    const double raw_label = label_scale * z_sum / static_cast<double>(z.size());

    Sample s;
    s.label = std::clamp(raw_label, -3.0, 3.0);
    for (Modality m : kModalities) {
      const int d_m = d.dim(m);
      const int signal_cols = static_cast<int>(std::floor(spec.redundancy * d_m + 0.5));
      Matrix x(spec.T, d_m);
      for (int t = 0; t < spec.T; ++t) {
        for (int c = 0; c < d_m; ++c) {
          x(t, c) = c < signal_cols ? z(c % k, t) : rng.next_gaussian();
        }
      }
      if (spec.noise_sigma > 0.0) {
        for (std::size_t e = 0; e < x.size(); ++e) {
          x.at(e) += spec.noise_sigma * rng.next_gaussian();
        }
      }
      s.mods[static_cast<int>(m)] = ModalitySequence{m, std::move(x)};
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

Dataset slice_dataset(const Dataset& d, std::size_t start, std::size_t count) {
  if (start + count > d.samples.size()) {
    throw std::invalid_argument("slice_dataset: range [" + std::to_string(start) + ", " +
                                std::to_string(start + count) + ") exceeds dataset size " +
                                std::to_string(d.samples.size()));
  }
  Dataset out;
  out.T = d.T;
  out.d_v = d.d_v;
  out.d_a = d.d_a;
  out.d_l = d.d_l;
  out.samples.assign(d.samples.begin() + start, d.samples.begin() + start + count);
  return out;
}

// --- binary primitives --------------------------------------------------------

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= kFnvPrime;
  }
  return h;
}

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

void put_magic(std::vector<std::uint8_t>& buf, const char magic[4]) {
  buf.insert(buf.end(), magic, magic + 4);
}

class Reader {
 public:
  Reader(std::vector<std::uint8_t> bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

  void expect_magic(const char magic[4]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
      throw FormatError(FormatError::Kind::bad_magic,
                        path_ + ": bad magic, not a " + std::string(magic, 4) + " file");
    }
    pos_ += 4;
  }
  void expect_version(std::uint32_t supported) {
    const std::uint32_t v = u32();
    if (v != supported) {
      throw FormatError(FormatError::Kind::bad_version,
                        path_ + ": unsupported format version " + std::to_string(v));
    }
  }
  // Validates total size implied by the header before any payload allocation.
  void expect_total_size(std::uint64_t payload_bytes) {
    const std::uint64_t expected = pos_ + payload_bytes + 8;  // + trailing checksum
    if (bytes_.size() != expected) {
      throw FormatError(FormatError::Kind::truncated,
                        path_ + ": file size " + std::to_string(bytes_.size()) +
                            " does not match header-implied size " + std::to_string(expected));
    }
  }
  // Position-independent: the trailing 8 bytes cover everything before them.
  void verify_checksum() {
    if (bytes_.size() < 8) {
      throw FormatError(FormatError::Kind::truncated, path_ + ": too short for a checksum");
    }
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) {
      stored |= static_cast<std::uint64_t>(bytes_[bytes_.size() - 8 + i]) << (8 * i);
    }
    const std::uint64_t computed = fnv1a(bytes_.data(), bytes_.size() - 8);
    if (stored != computed) {
      throw FormatError(FormatError::Kind::bad_checksum, path_ + ": checksum mismatch");
    }
  }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw FormatError(FormatError::Kind::truncated, path_ + ": unexpected end of file");
    }
  }

  std::vector<std::uint8_t> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

void write_file(const std::string& path, std::vector<std::uint8_t>& buf) {
  put_u64(buf, fnv1a(buf.data(), buf.size()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

// --- dataset (.gds) -----------------------------------------------------------

void save_dataset(const Dataset& d, const std::string& path) {
  std::vector<std::uint8_t> buf;
  put_magic(buf, "GDSF");
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(d.samples.size()));
  put_u32(buf, static_cast<std::uint32_t>(d.T));
  put_u32(buf, static_cast<std::uint32_t>(d.d_v));
  put_u32(buf, static_cast<std::uint32_t>(d.d_a));
  put_u32(buf, static_cast<std::uint32_t>(d.d_l));
  for (const Sample& s : d.samples) {
    put_f64(buf, s.label);
    for (Modality m : kModalities) {
      const Matrix& x = s.x(m);
      if (x.rows() != d.T || x.cols() != d.dim(m)) {
        throw std::invalid_argument("save_dataset: sample shape " + x.shape_str() +
                                    " inconsistent with dataset dims");
      }
      for (std::size_t i = 0; i < x.size(); ++i) put_f64(buf, x.at(i));
    }
  }
  write_file(path, buf);
}

Dataset load_dataset(const std::string& path) {
  Reader r(read_file(path), path);
  r.expect_magic("GDSF");
  r.expect_version(kFormatVersion);
  const std::uint64_t n = r.u32();
  Dataset d;
  d.T = static_cast<int>(r.u32());
  d.d_v = static_cast<int>(r.u32());
  d.d_a = static_cast<int>(r.u32());
  d.d_l = static_cast<int>(r.u32());
  const std::uint64_t per_sample =
      8 + 8ULL * d.T * (static_cast<std::uint64_t>(d.d_v) + d.d_a + d.d_l);
  r.expect_total_size(n * per_sample);
  r.verify_checksum();

  d.samples.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Sample s;
    s.label = r.f64();
    for (Modality m : kModalities) {
      Matrix x(d.T, d.dim(m));
      for (std::size_t e = 0; e < x.size(); ++e) x.at(e) = r.f64();
      s.mods[static_cast<int>(m)] = ModalitySequence{m, std::move(x)};
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

// --- mask sidecar (.gmask) ------------------------------------------------------

void save_masks(const std::vector<MaskSet>& masks, const std::string& path) {
  const int T = masks.empty() ? 0 : masks[0].length();
  std::vector<std::uint8_t> buf;
  put_magic(buf, "GMSK");
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(masks.size()));
  put_u32(buf, static_cast<std::uint32_t>(T));
  const int bytes_per_vec = (T + 7) / 8;
  for (const MaskSet& ms : masks) {
    for (Modality m : kModalities) {
      const auto& vec = ms.mask(m);
      if (static_cast<int>(vec.size()) != T) {
        throw std::invalid_argument("save_masks: inconsistent mask length");
      }
      for (int b = 0; b < bytes_per_vec; ++b) {
        std::uint8_t byte = 0;
        for (int bit = 0; bit < 8; ++bit) {
          const int t = b * 8 + bit;
          if (t < T && vec[t]) byte |= static_cast<std::uint8_t>(1u << bit);
        }
        buf.push_back(byte);
      }
    }
  }
  write_file(path, buf);
}

std::vector<MaskSet> load_masks(const std::string& path) {
  Reader r(read_file(path), path);
  r.expect_magic("GMSK");
  r.expect_version(kFormatVersion);
  const std::uint64_t n = r.u32();
  const int T = static_cast<int>(r.u32());
  const int bytes_per_vec = (T + 7) / 8;
  r.expect_total_size(n * 3ULL * bytes_per_vec);

  std::vector<MaskSet> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    MaskSet ms;
    for (Modality m : kModalities) {
      auto& vec = ms.masks[static_cast<int>(m)];
      vec.assign(T, 0);
      for (int b = 0; b < bytes_per_vec; ++b) {
        const std::uint8_t byte = r.u8();
        for (int bit = 0; bit < 8; ++bit) {
          const int t = b * 8 + bit;
          if (t < T) vec[t] = (byte >> bit) & 1u;
        }
      }
    }
    out.push_back(std::move(ms));
  }
  r.verify_checksum();
  return out;
}

// --- checkpoint (.gckpt) --------------------------------------------------------

void save_checkpoint(const ModelConfig& cfg, const ModelParams& params, const std::string& path) {
  std::vector<std::uint8_t> buf;
  put_magic(buf, "GCKP");
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(cfg.d_v));
  put_u32(buf, static_cast<std::uint32_t>(cfg.d_a));
  put_u32(buf, static_cast<std::uint32_t>(cfg.d_l));
  put_u32(buf, static_cast<std::uint32_t>(cfg.d_proj));
  put_u32(buf, static_cast<std::uint32_t>(cfg.d_h));
  put_u32(buf, static_cast<std::uint32_t>(cfg.hyperedges));
  put_u32(buf, static_cast<std::uint32_t>(cfg.fusion_layers));
  put_f64(buf, cfg.temperature);
  put_f64(buf, cfg.lambda_attn);
  std::uint32_t flags = 0;
  if (cfg.hard_incidence) flags |= 1u;
  if (cfg.eq2_literal) flags |= 2u;
  if (cfg.per_edge_attention) flags |= 4u;
  if (cfg.learn_hyperedge_weights) flags |= 8u;
  if (cfg.pe_after_corruption) flags |= 16u;
  put_u32(buf, flags);

  // Shape manifest in flat order, then the payload.
  std::uint32_t n_tensors = 0;
  visit_tensors(params, [&](const std::string&, const Matrix&) { ++n_tensors; });
  put_u32(buf, n_tensors);
  visit_tensors(params, [&](const std::string&, const Matrix& m) {
    put_u32(buf, static_cast<std::uint32_t>(m.rows()));
    put_u32(buf, static_cast<std::uint32_t>(m.cols()));
  });
  visit_tensors(params, [&](const std::string&, const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) put_f64(buf, m.at(i));
  });
  write_file(path, buf);
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path) {
  Reader r(read_file(path), path);
  r.expect_magic("GCKP");
  r.expect_version(kFormatVersion);
  ModelConfig cfg;
  cfg.d_v = static_cast<int>(r.u32());
  cfg.d_a = static_cast<int>(r.u32());
  cfg.d_l = static_cast<int>(r.u32());
  cfg.d_proj = static_cast<int>(r.u32());
  cfg.d_h = static_cast<int>(r.u32());
  cfg.hyperedges = static_cast<int>(r.u32());
  cfg.fusion_layers = static_cast<int>(r.u32());
  cfg.temperature = r.f64();
  cfg.lambda_attn = r.f64();
  const std::uint32_t flags = r.u32();
  cfg.hard_incidence = flags & 1u;
  cfg.eq2_literal = flags & 2u;
  cfg.per_edge_attention = flags & 4u;
  cfg.learn_hyperedge_weights = flags & 8u;
  cfg.pe_after_corruption = flags & 16u;
  cfg.validate();

  // Expected shapes from the config; the stored manifest must agree.
  ModelParams params = init_params(cfg, 0);
  const std::uint32_t n_tensors = r.u32();
  std::uint32_t expected_tensors = 0;
  visit_tensors(params, [&](const std::string&, const Matrix&) { ++expected_tensors; });
  if (n_tensors != expected_tensors) {
    throw FormatError(FormatError::Kind::shape_mismatch,
                      path + ": checkpoint holds " + std::to_string(n_tensors) +
                          " tensors, config implies " + std::to_string(expected_tensors));
  }
  std::uint64_t total = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(n_tensors);
  for (auto& [rows, cols] : shapes) {
    rows = r.u32();
    cols = r.u32();
    total += static_cast<std::uint64_t>(rows) * cols;
  }
  std::size_t idx = 0;
  visit_tensors(params, [&](const std::string& name, const Matrix& m) {
    const auto [rows, cols] = shapes[idx++];
    if (static_cast<int>(rows) != m.rows() || static_cast<int>(cols) != m.cols()) {
      throw FormatError(FormatError::Kind::shape_mismatch,
                        path + ": tensor '" + name + "' stored as " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", config implies " + m.shape_str());
    }
  });
  r.expect_total_size(8 * total);
  r.verify_checksum();

  visit_tensors(params, [&](const std::string&, Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) m.at(i) = r.f64();
  });
  return {cfg, std::move(params)};
}

// --- generic tensor (.gten) ------------------------------------------------------

void save_tensor(const Matrix& m, const std::string& path) {
  std::vector<std::uint8_t> buf;
  put_magic(buf, "GTEN");
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(m.rows()));
  put_u32(buf, static_cast<std::uint32_t>(m.cols()));
  for (std::size_t i = 0; i < m.size(); ++i) put_f64(buf, m.at(i));
  write_file(path, buf);
}

Matrix load_tensor(const std::string& path) {
  Reader r(read_file(path), path);
  r.expect_magic("GTEN");
  r.expect_version(kFormatVersion);
  const int rows = static_cast<int>(r.u32());
  const int cols = static_cast<int>(r.u32());
  r.expect_total_size(8ULL * rows * cols);
  r.verify_checksum();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.at(i) = r.f64();
  return m;
}

// --- manifest (JSON) --------------------------------------------------------------

void save_manifest(const DatasetManifest& m, const std::string& path) {
  nlohmann::json j{{"format_version", m.format_version},
                   {"train_n", m.train_n},
                   {"val_n", m.val_n},
                   {"test_n", m.test_n},
                   {"T", m.T},
                   {"d_v", m.d_v},
                   {"d_a", m.d_a},
                   {"d_l", m.d_l},
                   {"source", m.source}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  nlohmann::json j = nlohmann::json::parse(in);
  DatasetManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1) {
    throw FormatError(FormatError::Kind::bad_version,
                      path + ": unsupported manifest version " +
                          std::to_string(m.format_version));
  }
  m.train_n = j.at("train_n").get<int>();
  m.val_n = j.at("val_n").get<int>();
  m.test_n = j.at("test_n").get<int>();
  m.T = j.at("T").get<int>();
  m.d_v = j.at("d_v").get<int>();
  m.d_a = j.at("d_a").get<int>();
  m.d_l = j.at("d_l").get<int>();
  m.source = j.value("source", "");
  return m;
}

}  // namespace gian

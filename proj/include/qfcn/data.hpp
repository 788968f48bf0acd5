// Synthetic two-pattern segmentation data: step-profile angle vectors with
// per-position labels, a pinned deterministic generator, and line-oriented
// (de)serialization.
#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace qfcn {

// Pinned deterministic random stream: mt19937_64 words plus an explicit
// Box-Muller transform for Gaussians. The standard library's
// normal_distribution is implementation-defined, which would let datasets
// drift across toolchains; this one is part of the file-format contract.
// Dataset noise and parameter initialization both draw from it.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t next_word() { return rng_(); }

  double next_gaussian();

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct Sample {
  std::vector<double> x;       // encoding angles, radians
  std::vector<double> labels;  // strictly -1 or +1 per position
};

// Everything needed to regenerate the sample list bit-exactly.
struct DatasetMeta {
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  double theta_a = std::numbers::pi / 4;      // class A base angle, label -1
  double theta_b = 3 * std::numbers::pi / 4;  // class B base angle, label +1
  int n_qubits = 8;
};

struct Dataset {
  std::vector<Sample> samples;
  DatasetMeta meta;
};

// Each sample: a cut point c uniform on {1, ..., n_qubits-1}; positions
// before c are class A, the rest class B; x_q = base angle + N(0, sigma).
// The generator (mt19937_64 + Box-Muller) is pinned so that (meta, n)
// regenerates any saved dataset exactly.
Dataset gen_dataset(int n_samples, std::uint64_t seed, double noise_sigma,
                    double theta_a = std::numbers::pi / 4,
                    double theta_b = 3 * std::numbers::pi / 4,
                    int n_qubits = 8);
Dataset gen_dataset(int n_samples, const DatasetMeta& meta);

// Exact file bytes of the dataset (header lines, then one sample per line);
// save_dataset writes precisely these bytes.
std::string serialize_dataset(const Dataset& ds);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// FNV-1a, used to fingerprint dataset bytes in comparison reports.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace qfcn

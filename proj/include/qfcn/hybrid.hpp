// Hybrid baseline (QCNN front end + classical upsampling head) and the
// two-arm comparison harness.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qfcn/circuit.hpp"
#include "qfcn/data.hpp"
#include "qfcn/training.hpp"

namespace qfcn {

// One affine map + tanh per output position: Y_q = tanh(w_q . r + b_q).
struct ClassicalHead {
  Eigen::MatrixXd weights;  // n_out x n_in
  Eigen::VectorXd biases;   // n_out

  int n_in() const { return static_cast<int>(weights.cols()); }
  int n_out() const { return static_cast<int>(weights.rows()); }
};

// Zero-initialized head of the given shape.
ClassicalHead make_head(int n_in, int n_out);

int head_param_count(int n_in, int n_out);

// Unpacks a head from a flat slice: row-major weights, then biases.
ClassicalHead head_from_params(std::span<const double> values, int n_in,
                               int n_out);

// Y_q = tanh(w_q . r + b_q); outputs strictly inside (-1, 1).
std::vector<double> classical_upsample(std::span<const double> r,
                                       const ClassicalHead& head);

// Joint descent on quantum + head parameters against the MSE of
// classical_upsample(forward_qcnn(...)). spec must be truncated at the
// bottleneck (see truncate_at_bottleneck).
std::pair<ParamVector, TrainingTrace> train_hybrid(const CircuitSpec& spec,
                                                   const Dataset& dataset,
                                                   const TrainConfig& cfg);

enum class Experiment { kHybridVsPure, kSharedVsPerSite };

struct ArmReport {
  std::string name;
  int n_params = 0;
  std::uint64_t dataset_checksum = 0;  // FNV-1a of the arm's dataset bytes
  TrainingTrace trace;
};

struct ComparisonReport {
  std::string experiment;
  DatasetMeta dataset_meta;
  int n_samples = 0;
  ArchitectureConfig architecture;  // snapshot; arms override upsample_mode
  TrainConfig training;
  std::vector<ArmReport> arms;  // exactly two
  // Directional findings of this seeded run, reported, never asserted.
  std::vector<std::string> observations;
};

// Trains both arms of the chosen experiment on the identical dataset with
// identical seeds and returns the paired traces.
ComparisonReport compare_models(Experiment experiment, const Dataset& dataset,
                                const ArchitectureConfig& arch,
                                const TrainConfig& cfg);

} // namespace qfcn

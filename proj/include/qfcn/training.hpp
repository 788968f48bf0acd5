// MSE loss, exact shift-rule and finite-difference gradients, and the plain
// full-batch gradient-descent loop with the successive-loss stopping rule.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qfcn/circuit.hpp"
#include "qfcn/data.hpp"

namespace qfcn {

struct ClassicalHead;  // hybrid.hpp

// Raised when the divergence guard trips: loss above 1e6 or non-finite.
class divergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDivergenceLimit = 1e6;

enum class GradMethod { kCentralFd, kParamShift };
enum class StopReason { kToleranceMet, kMaxEpochs };

struct TrainConfig {
  double step_size = 0.05;  // delta in theta <- theta - delta * grad
  double tolerance = 1e-6;  // epsilon; 0 never stops early
  int max_epochs = 100;
  GradMethod grad_method = GradMethod::kParamShift;
  double fd_step = 1e-5;  // h for central differences
  double init_scale = 0.1;
  std::uint64_t init_seed = 0;
  // Empty: every parameter learns. Otherwise one flag per parameter; frozen
  // parameters keep their initial values through all updates.
  std::vector<bool> trainable;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double accuracy = 0.0;
  double elapsed_ms = 0.0;
};

struct TrainingTrace {
  double initial_loss = 0.0;  // L(theta^0), before the first update
  double initial_accuracy = 0.0;
  std::vector<EpochRecord> records;  // one per performed epoch
  StopReason stop_reason = StopReason::kMaxEpochs;
};

// (1/N) sum_n |targets_n - predictions_n|^2
double mse_loss(const std::vector<std::vector<double>>& predictions,
                const std::vector<std::vector<double>>& targets);

// Fraction of (sample, position) pairs with sign(Y) equal to the target;
// sign(0) counts as +1.
double accuracy(const std::vector<std::vector<double>>& predictions,
                const std::vector<std::vector<double>>& targets);

using LossFn = std::function<double(std::span<const double>)>;

// Component i: (L(theta + h e_i) - L(theta - h e_i)) / (2h).
std::vector<double> grad_central_fd(const LossFn& loss_at,
                                    std::span<const double> theta, double h);

// One evaluation of the shift rule: L' = sum_k coeff_k * f(theta + shift_k).
struct ShiftTerm {
  double shift = 0.0;
  double coeff = 0.0;
};

// The exact rule for each parameter kind. Rotations exp(-i theta sigma/2)
// need two points; the canonical exponents exp(i theta P x P) two points at
// half the shift; controlled rotations mix frequencies 1/2 and 1 and need
// four points. Classical parameters are not shift-eligible.
std::span<const ShiftTerm> shift_terms(ParamKind kind);

// Exact MSE gradient of the pure QFCN via the shift rule, full batch.
std::vector<double> grad_param_shift(const CircuitSpec& spec,
                                     const ParamVector& theta,
                                     const Dataset& batch);

// Generic descent core used by train; exposed so the divergence guard and
// stopping rule are testable against synthetic objectives.
struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;
};
using MetricsFn = std::function<Metrics(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

struct DescentOptions {
  double step_size = 0.0;
  double tolerance = 0.0;
  int max_epochs = 1;
  std::vector<bool> trainable;
};

std::pair<std::vector<double>, TrainingTrace> gradient_descent(
    const MetricsFn& metrics, const GradientFn& gradient,
    std::vector<double> theta0, const DescentOptions& opts);

// Full training run: Gaussian(0, init_scale) initialization from init_seed,
// then description above. With a head, spec must be truncated at the
// bottleneck; the head's parameters (row-major weights, then biases) are
// appended to theta as a "head" slice and updated by the same rule.
std::pair<ParamVector, TrainingTrace> train(const CircuitSpec& spec,
                                            const Dataset& dataset,
                                            const TrainConfig& cfg,
                                            const ClassicalHead* head = nullptr);

} // namespace qfcn

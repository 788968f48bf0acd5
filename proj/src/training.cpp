#include "qfcn/training.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "qfcn/hybrid.hpp"

namespace qfcn {

namespace {

double sign_of(double v) { return v >= 0.0 ? 1.0 : -1.0; }

void check_shapes(const std::vector<std::vector<double>>& predictions,
                  const std::vector<std::vector<double>>& targets,
                  const char* what) {
  if (predictions.empty() || predictions.size() != targets.size()) {
    throw std::invalid_argument(std::string(what) + ": got " +
                                std::to_string(predictions.size()) +
                                " predictions for " +
                                std::to_string(targets.size()) + " targets");
  }
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    if (predictions[n].size() != targets[n].size()) {
      throw std::invalid_argument(std::string(what) + ": width mismatch at row " +
                                  std::to_string(n));
    }
  }
}

void check_divergence(double loss, int epoch) {
  if (!std::isfinite(loss) || loss > kDivergenceLimit) {
    throw divergence_error("training diverged at epoch " +
                           std::to_string(epoch) +
                           ": loss = " + std::to_string(loss));
  }
}

std::vector<std::vector<double>> target_rows(const Dataset& ds) {
  std::vector<std::vector<double>> targets;
  targets.reserve(ds.samples.size());
  for (const Sample& s : ds.samples) targets.push_back(s.labels);
  return targets;
}

void check_train_inputs(const CircuitSpec& spec, const Dataset& ds,
                        const TrainConfig& cfg) {
  if (!(cfg.step_size > 0.0)) {
    throw std::invalid_argument("train: step_size must be > 0");
  }
  if (!(cfg.tolerance >= 0.0)) {
    throw std::invalid_argument("train: tolerance must be >= 0");
  }
  if (cfg.max_epochs < 1) {
    throw std::invalid_argument("train: max_epochs must be >= 1");
  }
  if (!(cfg.fd_step > 0.0)) {
    throw std::invalid_argument("train: fd_step must be > 0");
  }
  if (ds.samples.empty()) {
    throw std::invalid_argument("train: dataset is empty");
  }
  for (const Sample& s : ds.samples) {
    if (s.x.size() != static_cast<std::size_t>(spec.n_qubits) ||
        s.labels.size() != static_cast<std::size_t>(spec.n_qubits)) {
      throw std::invalid_argument("train: dataset width does not match the "
                                  "spec's " +
                                  std::to_string(spec.n_qubits) + " qubits");
    }
  }
}

// Evaluates the readout Jacobian contraction sum_k dLdr[k] * r_shifted[k]
// for one shifted parameter, shared by the pure and hybrid shift gradients.
double contract(std::span<const double> weights, const std::vector<double>& r) {
  double sum = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) sum += weights[k] * r[k];
  return sum;
}

} // namespace

double mse_loss(const std::vector<std::vector<double>>& predictions,
                const std::vector<std::vector<double>>& targets) {
  check_shapes(predictions, targets, "mse_loss");
  double total = 0.0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    for (std::size_t q = 0; q < predictions[n].size(); ++q) {
      const double diff = targets[n][q] - predictions[n][q];
      total += diff * diff;
    }
  }
  return total / static_cast<double>(predictions.size());
}

double accuracy(const std::vector<std::vector<double>>& predictions,
                const std::vector<std::vector<double>>& targets) {
  check_shapes(predictions, targets, "accuracy");
  std::size_t hits = 0, total = 0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    for (std::size_t q = 0; q < predictions[n].size(); ++q) {
      hits += sign_of(predictions[n][q]) == targets[n][q] ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> grad_central_fd(const LossFn& loss_at,
                                    std::span<const double> theta, double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("grad_central_fd: h must be > 0");
  }
  std::vector<double> probe(theta.begin(), theta.end());
  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = loss_at(probe);
    probe[i] = saved - h;
    const double down = loss_at(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw divergence_error("grad_central_fd: non-finite loss at component " +
                             std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::span<const ShiftTerm> shift_terms(ParamKind kind) {
  static constexpr double kPi = std::numbers::pi;
  // Frequency-1 gates exp(-i theta sigma/2).
  static constexpr ShiftTerm kRotation[] = {{+kPi / 2, +0.5},
                                            {-kPi / 2, -0.5}};
  // Frequency-2 gates exp(i theta P x P).
  static constexpr ShiftTerm kCanonical[] = {{+kPi / 4, +1.0},
                                             {-kPi / 4, -1.0}};
  // Controlled rotations mix frequencies 1/2 and 1; the four-point rule with
  // c_pm = (sqrt 2 +- 1) / (4 sqrt 2) differentiates both exactly.
  static const double kCPlus = (std::sqrt(2.0) + 1.0) / (4.0 * std::sqrt(2.0));
  static const double kCMinus = (std::sqrt(2.0) - 1.0) / (4.0 * std::sqrt(2.0));
  static const ShiftTerm kControlled[] = {{+kPi / 2, +kCPlus},
                                          {-kPi / 2, -kCPlus},
                                          {+3 * kPi / 2, -kCMinus},
                                          {-3 * kPi / 2, +kCMinus}};
  switch (kind) {
    case ParamKind::kRotationHalf:
      return kRotation;
    case ParamKind::kCanonicalFull:
      return kCanonical;
    case ParamKind::kControlledRotation:
      return kControlled;
    case ParamKind::kClassical:
      break;
  }
  throw std::invalid_argument("shift_terms: parameter is not shift-eligible");
}

std::vector<double> grad_param_shift(const CircuitSpec& spec,
                                     const ParamVector& theta,
                                     const Dataset& batch) {
  if (batch.samples.empty()) {
    throw std::invalid_argument("grad_param_shift: empty batch");
  }
  const std::size_t n_params = theta.values.size();
  const double scale = 2.0 / static_cast<double>(batch.samples.size());

  // dL/dY_q per sample; the shift rule then only needs readout contractions.
  std::vector<std::vector<double>> residuals;
  residuals.reserve(batch.samples.size());
  for (const Sample& s : batch.samples) {
    const std::vector<double> y = forward(spec, theta, s.x);
    std::vector<double> r(y.size());
    for (std::size_t q = 0; q < y.size(); ++q) {
      r[q] = scale * (y[q] - s.labels[q]);
    }
    residuals.push_back(std::move(r));
  }

  // A shared parameter enters one gate per pair/repetition/site; the rule is
  // exact per occurrence, so the derivative is the sum of single-occurrence
  // shift evaluations (the other occurrences stay at the tied value).
  const std::vector<int> occurrences = detail::occurrence_counts(spec);
  std::vector<double> grad(n_params, 0.0);
  for (std::size_t i = 0; i < n_params; ++i) {
    const auto terms = shift_terms(theta.layout.kinds[i]);
    double g = 0.0;
    for (int occ = 0; occ < occurrences[i]; ++occ) {
      for (const ShiftTerm& term : terms) {
        const detail::OccurrenceShift shift{static_cast<int>(i), term.shift,
                                            occ};
        for (std::size_t n = 0; n < batch.samples.size(); ++n) {
          const std::vector<double> y =
              detail::forward_shifted(spec, theta, batch.samples[n].x, shift,
                                      /*stop_at_bottleneck=*/false);
          g += term.coeff * contract(residuals[n], y);
        }
      }
    }
    grad[i] = g;
  }
  return grad;
}

std::pair<std::vector<double>, TrainingTrace> gradient_descent(
    const MetricsFn& metrics, const GradientFn& gradient,
    std::vector<double> theta0, const DescentOptions& opts) {
  if (!(opts.step_size > 0.0)) {
    throw std::invalid_argument("gradient_descent: step_size must be > 0");
  }
  if (!(opts.tolerance >= 0.0)) {
    throw std::invalid_argument("gradient_descent: tolerance must be >= 0");
  }
  if (opts.max_epochs < 1) {
    throw std::invalid_argument("gradient_descent: max_epochs must be >= 1");
  }
  if (!opts.trainable.empty() && opts.trainable.size() != theta0.size()) {
    throw std::invalid_argument("gradient_descent: trainable mask has " +
                                std::to_string(opts.trainable.size()) +
                                " entries for " +
                                std::to_string(theta0.size()) + " parameters");
  }

  std::vector<double> theta = std::move(theta0);
  TrainingTrace trace;
  Metrics m = metrics(theta);
  check_divergence(m.loss, 0);
  trace.initial_loss = m.loss;
  trace.initial_accuracy = m.accuracy;
  trace.stop_reason = StopReason::kMaxEpochs;

  double previous_loss = m.loss;
  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const std::vector<double> grad = gradient(theta);
    if (grad.size() != theta.size()) {
      throw std::invalid_argument("gradient_descent: gradient has " +
                                  std::to_string(grad.size()) +
                                  " entries for " +
                                  std::to_string(theta.size()) +
                                  " parameters");
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (opts.trainable.empty() || opts.trainable[i]) {
        theta[i] -= opts.step_size * grad[i];
      }
    }
    m = metrics(theta);
    check_divergence(m.loss, epoch);
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
    trace.records.push_back(EpochRecord{epoch, m.loss, m.accuracy, elapsed_ms});
    // tolerance 0 disables early stopping: a flat epoch is not convergence.
    if (opts.tolerance > 0.0 &&
        std::abs(m.loss - previous_loss) <= opts.tolerance) {
      trace.stop_reason = StopReason::kToleranceMet;
      break;
    }
    previous_loss = m.loss;
  }
  return {std::move(theta), trace};
}

namespace {

// Model plumbing shared by the pure and hybrid paths: predictions, metrics,
// and the configured gradient.
struct Model {
  const CircuitSpec& spec;
  const Dataset& dataset;
  const TrainConfig& cfg;
  bool hybrid = false;
  int head_in = 0;
  int head_out = 0;
  int n_quantum = 0;
  std::vector<std::vector<double>> targets;
  ParamLayout layout;  // spec layout, plus a "head" slice when hybrid

  std::vector<double> predict(std::span<const double> theta,
                              const Sample& sample) const {
    ParamVector quantum{
        std::vector<double>(theta.begin(), theta.begin() + n_quantum),
        spec.layout};
    if (!hybrid) return forward(spec, quantum, sample.x);
    const ClassicalHead head = head_from_params(
        theta.subspan(n_quantum), head_in, head_out);
    return classical_upsample(forward_qcnn(spec, quantum, sample.x), head);
  }

  Metrics metrics(std::span<const double> theta) const {
    std::vector<std::vector<double>> predictions;
    predictions.reserve(dataset.samples.size());
    for (const Sample& s : dataset.samples) {
      predictions.push_back(predict(theta, s));
    }
    return Metrics{mse_loss(predictions, targets),
                   accuracy(predictions, targets)};
  }

  double loss(std::span<const double> theta) const {
    return metrics(theta).loss;
  }

  std::vector<double> gradient(std::span<const double> theta) const {
    if (cfg.grad_method == GradMethod::kCentralFd) {
      return grad_central_fd([this](std::span<const double> t) { return loss(t); },
                             theta, cfg.fd_step);
    }
    if (!hybrid) {
      ParamVector params{std::vector<double>(theta.begin(), theta.end()),
                         spec.layout};
      return grad_param_shift(spec, params, dataset);
    }
    return hybrid_shift_gradient(theta);
  }

  // Quantum components via the shift rule chained through the analytic head
  // backprop; head components via central differences over the cached
  // bottleneck readouts (the quantum circuit is not re-run for them).
  std::vector<double> hybrid_shift_gradient(std::span<const double> theta) const {
    const std::size_t n_samples = dataset.samples.size();
    const double scale = 2.0 / static_cast<double>(n_samples);
    const ClassicalHead head = head_from_params(
        theta.subspan(n_quantum), head_in, head_out);
    ParamVector quantum{
        std::vector<double>(theta.begin(), theta.begin() + n_quantum),
        spec.layout};

    // Cached bottleneck readouts and dL/dr per sample.
    std::vector<std::vector<double>> readouts(n_samples);
    std::vector<std::vector<double>> dldr(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) {
      readouts[n] = forward_qcnn(spec, quantum, dataset.samples[n].x);
      const std::vector<double> y = classical_upsample(readouts[n], head);
      dldr[n].assign(head_in, 0.0);
      for (int q = 0; q < head_out; ++q) {
        const double dY = scale * (y[q] - dataset.samples[n].labels[q]) *
                          (1.0 - y[q] * y[q]);
        for (int k = 0; k < head_in; ++k) {
          dldr[n][k] += dY * head.weights(q, k);
        }
      }
    }

    std::vector<double> grad(theta.size(), 0.0);
    const std::vector<int> occurrences = detail::occurrence_counts(spec);
    for (int i = 0; i < n_quantum; ++i) {
      const auto terms = shift_terms(spec.layout.kinds[i]);
      double g = 0.0;
      for (int occ = 0; occ < occurrences[i]; ++occ) {
        for (const ShiftTerm& term : terms) {
          const detail::OccurrenceShift shift{i, term.shift, occ};
          for (std::size_t n = 0; n < n_samples; ++n) {
            const std::vector<double> r =
                detail::forward_shifted(spec, quantum, dataset.samples[n].x,
                                        shift, /*stop_at_bottleneck=*/true);
            g += term.coeff * contract(dldr[n], r);
          }
        }
      }
      grad[i] = g;
    }

    // Head loss over the cached readouts only.
    const auto head_loss = [&](std::span<const double> head_theta) {
      const ClassicalHead h =
          head_from_params(head_theta, head_in, head_out);
      double total = 0.0;
      for (std::size_t n = 0; n < n_samples; ++n) {
        const std::vector<double> y = classical_upsample(readouts[n], h);
        for (int q = 0; q < head_out; ++q) {
          const double diff = dataset.samples[n].labels[q] - y[q];
          total += diff * diff;
        }
      }
      return total / static_cast<double>(n_samples);
    };
    const std::vector<double> head_grad = grad_central_fd(
        head_loss, theta.subspan(n_quantum), cfg.fd_step);
    for (std::size_t j = 0; j < head_grad.size(); ++j) {
      grad[n_quantum + j] = head_grad[j];
    }
    return grad;
  }
};

} // namespace

std::pair<ParamVector, TrainingTrace> train(const CircuitSpec& spec,
                                            const Dataset& dataset,
                                            const TrainConfig& cfg,
                                            const ClassicalHead* head) {
  check_train_inputs(spec, dataset, cfg);

  Model model{spec, dataset, cfg};
  model.n_quantum = spec.layout.total();
  model.targets = target_rows(dataset);
  model.layout = spec.layout;
  if (head != nullptr) {
    for (const Layer& layer : spec.layers) {
      if (std::holds_alternative<UpsampleLayer>(layer)) {
        throw std::invalid_argument(
            "train: hybrid training requires a spec truncated at the "
            "bottleneck");
      }
    }
    if (head->n_in() != spec.bottleneck_width ||
        head->n_out() != spec.n_qubits) {
      throw std::invalid_argument(
          "train: head shape " + std::to_string(head->n_out()) + "x" +
          std::to_string(head->n_in()) + " does not match bottleneck " +
          std::to_string(spec.bottleneck_width) + " -> " +
          std::to_string(spec.n_qubits));
    }
    model.hybrid = true;
    model.head_in = head->n_in();
    model.head_out = head->n_out();
    const int head_len = head_param_count(model.head_in, model.head_out);
    model.layout.slices.push_back(
        ParamSlice{"head", model.n_quantum, head_len});
    model.layout.kinds.insert(model.layout.kinds.end(), head_len,
                              ParamKind::kClassical);
  }

  const int n_params = model.layout.total();
  if (!cfg.trainable.empty() &&
      cfg.trainable.size() != static_cast<std::size_t>(n_params)) {
    throw std::invalid_argument("train: trainable mask has " +
                                std::to_string(cfg.trainable.size()) +
                                " entries for " + std::to_string(n_params) +
                                " parameters");
  }

  GaussianSource source(cfg.init_seed);
  std::vector<double> theta0(n_params);
  for (double& v : theta0) v = cfg.init_scale * source.next_gaussian();

  DescentOptions opts;
  opts.step_size = cfg.step_size;
  opts.tolerance = cfg.tolerance;
  opts.max_epochs = cfg.max_epochs;
  opts.trainable = cfg.trainable;

  auto [theta, trace] = gradient_descent(
      [&model](std::span<const double> t) { return model.metrics(t); },
      [&model](std::span<const double> t) { return model.gradient(t); },
      std::move(theta0), opts);
  return {ParamVector{std::move(theta), model.layout}, std::move(trace)};
}

} // namespace qfcn

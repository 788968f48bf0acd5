#include "qfcn/hybrid.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace qfcn {

namespace {

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double final_loss(const TrainingTrace& trace) {
  return trace.records.empty() ? trace.initial_loss
                               : trace.records.back().loss;
}

double final_accuracy(const TrainingTrace& trace) {
  return trace.records.empty() ? trace.initial_accuracy
                               : trace.records.back().accuracy;
}

const char* stop_name(StopReason reason) {
  return reason == StopReason::kToleranceMet ? "tolerance_met" : "max_epochs";
}

// Directional statements about this seeded run only; nothing here is a
// correctness claim.
std::vector<std::string> make_observations(const ArmReport& a,
                                           const ArmReport& b) {
  std::vector<std::string> obs;
  const double loss_a = final_loss(a.trace), loss_b = final_loss(b.trace);
  const double acc_a = final_accuracy(a.trace),
               acc_b = final_accuracy(b.trace);

  std::string loss_line = "final loss: " + a.name + " " + short_num(loss_a) +
                          " vs " + b.name + " " + short_num(loss_b) + "; ";
  if (loss_a < loss_b) {
    loss_line += "the " + a.name + " arm ends lower on this run";
  } else if (loss_b < loss_a) {
    loss_line += "the " + b.name + " arm ends lower on this run";
  } else {
    loss_line += "both arms end equal on this run";
  }
  obs.push_back(std::move(loss_line));

  std::string acc_line = "final accuracy: " + a.name + " " +
                         short_num(acc_a) + " vs " + b.name + " " +
                         short_num(acc_b) + "; ";
  if (acc_a > acc_b) {
    acc_line += "the " + a.name + " arm ends higher on this run";
  } else if (acc_b > acc_a) {
    acc_line += "the " + b.name + " arm ends higher on this run";
  } else {
    acc_line += "both arms end equal on this run";
  }
  obs.push_back(std::move(acc_line));

  obs.push_back("epochs run: " + a.name + " " +
                std::to_string(a.trace.records.size()) + " (" +
                stop_name(a.trace.stop_reason) + ") vs " + b.name + " " +
                std::to_string(b.trace.records.size()) + " (" +
                stop_name(b.trace.stop_reason) + ")");

  obs.push_back("parameter count: " + a.name + " " +
                std::to_string(a.n_params) + " vs " + b.name + " " +
                std::to_string(b.n_params));
  return obs;
}

} // namespace

ClassicalHead make_head(int n_in, int n_out) {
  if (n_in < 1 || n_out < 1) {
    throw std::invalid_argument("make_head: sizes must be >= 1");
  }
  return ClassicalHead{Eigen::MatrixXd::Zero(n_out, n_in),
                       Eigen::VectorXd::Zero(n_out)};
}

int head_param_count(int n_in, int n_out) { return n_out * n_in + n_out; }

ClassicalHead head_from_params(std::span<const double> values, int n_in,
                               int n_out) {
  if (values.size() !=
      static_cast<std::size_t>(head_param_count(n_in, n_out))) {
    throw std::invalid_argument("head_from_params: got " +
                                std::to_string(values.size()) +
                                " values for a " + std::to_string(n_out) +
                                "x" + std::to_string(n_in) + " head");
  }
  ClassicalHead head = make_head(n_in, n_out);
  std::size_t at = 0;
  for (int q = 0; q < n_out; ++q) {
    for (int k = 0; k < n_in; ++k) head.weights(q, k) = values[at++];
  }
  for (int q = 0; q < n_out; ++q) head.biases[q] = values[at++];
  return head;
}

std::vector<double> classical_upsample(std::span<const double> r,
                                       const ClassicalHead& head) {
  if (r.size() != static_cast<std::size_t>(head.n_in())) {
    throw std::invalid_argument("classical_upsample: got " +
                                std::to_string(r.size()) +
                                " readouts for a head expecting " +
                                std::to_string(head.n_in()));
  }
  std::vector<double> y(head.n_out());
  for (int q = 0; q < head.n_out(); ++q) {
    double z = head.biases[q];
    for (int k = 0; k < head.n_in(); ++k) z += head.weights(q, k) * r[k];
    y[q] = std::tanh(z);
  }
  return y;
}

std::pair<ParamVector, TrainingTrace> train_hybrid(const CircuitSpec& spec,
                                                   const Dataset& dataset,
                                                   const TrainConfig& cfg) {
  const ClassicalHead shape = make_head(spec.bottleneck_width, spec.n_qubits);
  return train(spec, dataset, cfg, &shape);
}

ComparisonReport compare_models(Experiment experiment, const Dataset& dataset,
                                const ArchitectureConfig& arch,
                                const TrainConfig& cfg) {
  ComparisonReport report;
  report.dataset_meta = dataset.meta;
  report.n_samples = static_cast<int>(dataset.samples.size());
  report.architecture = arch;
  report.training = cfg;

  const std::uint64_t checksum = fnv1a64(serialize_dataset(dataset));

  auto run_arm = [&](const std::string& name, const CircuitSpec& spec,
                     bool hybrid) {
    auto [params, trace] = hybrid ? train_hybrid(spec, dataset, cfg)
                                  : train(spec, dataset, cfg);
    ArmReport arm;
    arm.name = name;
    arm.n_params = params.layout.total();
    arm.dataset_checksum = checksum;
    arm.trace = std::move(trace);
    return arm;
  };

  switch (experiment) {
    case Experiment::kHybridVsPure: {
      report.experiment = "hybrid_vs_pure";
      const CircuitSpec full = build_qfcn(arch);
      report.arms.push_back(run_arm("pure", full, false));
      report.arms.push_back(
          run_arm("hybrid", truncate_at_bottleneck(full), true));
      break;
    }
    case Experiment::kSharedVsPerSite: {
      report.experiment = "shared_vs_per_site";
      ArchitectureConfig shared = arch;
      shared.upsample_mode = UpsampleMode::kShared;
      ArchitectureConfig per_site = arch;
      per_site.upsample_mode = UpsampleMode::kPerSite;
      report.arms.push_back(run_arm("shared", build_qfcn(shared), false));
      report.arms.push_back(run_arm("per_site", build_qfcn(per_site), false));
      break;
    }
  }

  report.observations = make_observations(report.arms[0], report.arms[1]);
  return report;
}

} // namespace qfcn

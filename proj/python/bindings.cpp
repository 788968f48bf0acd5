// Python bindings for the main operations: gate construction, state
// evolution, circuit assembly/evaluation, data generation, and training.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qfcn/hybrid.hpp"

namespace py = pybind11;
using namespace qfcn;

namespace {

ParamVector bind_values(const CircuitSpec& spec, std::vector<double> values) {
  return make_params(spec, std::move(values));
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Density-matrix simulator and training harness for quantum "
            "fully convolutional networks";

  // --- gates ---------------------------------------------------------------
  py::enum_<Axis>(m, "Axis")
      .value("X", Axis::X)
      .value("Y", Axis::Y)
      .value("Z", Axis::Z);

  m.def("rotation", &rotation, py::arg("axis"), py::arg("theta"),
        "exp(-i theta sigma_axis / 2)");
  m.def("euler_zyz", &euler_zyz, py::arg("z1"), py::arg("y"), py::arg("z2"));
  m.def("canonical_interaction", &canonical_interaction, py::arg("ax"),
        py::arg("ay"), py::arg("az"),
        "exp(i (ax XX + ay YY + az ZZ))");
  m.def(
      "su4",
      [](const std::vector<double>& flat15) {
        return su4(std::span<const double>(flat15));
      },
      py::arg("flat15"), "15-parameter two-qubit gate");
  m.def("controlled", &controlled, py::arg("u"),
        "block-diagonal [[I, 0], [0, u]]");
  m.def("named_gate", &named_gate, py::arg("name"), "H, X, Y, Z, CNOT or CZ");
  m.def("kron", &kron, py::arg("a"), py::arg("b"));
  m.def("is_unitary", &is_unitary, py::arg("g"), py::arg("tol") = 1e-10);

  // --- states ----------------------------------------------------------------
  py::class_<PureState>(m, "PureState")
      .def(py::init<int>(), py::arg("n_qubits"))
      .def(py::init<int, Eigen::VectorXcd>(), py::arg("n_qubits"),
           py::arg("amplitudes"))
      .def_property_readonly("n_qubits", &PureState::n_qubits)
      .def_property_readonly("amplitudes", &PureState::amplitudes);

  py::class_<MixedState>(m, "MixedState")
      .def(py::init<int, Eigen::MatrixXcd>(), py::arg("n_qubits"),
           py::arg("matrix"))
      .def_property_readonly("n_qubits", &MixedState::n_qubits)
      .def_property_readonly("matrix", &MixedState::matrix)
      .def("min_eigenvalue", &MixedState::min_eigenvalue);

  m.def("new_pure", &new_pure, py::arg("n_qubits"));
  m.def("prepare_cluster_state", &prepare_cluster_state, py::arg("n_qubits"));
  m.def(
      "apply_unitary",
      [](const PureState& s, const GateMatrix& u, const std::vector<int>& t) {
        return apply_unitary(s, u, t);
      },
      py::arg("state"), py::arg("u"), py::arg("targets"));
  m.def(
      "apply_unitary",
      [](const MixedState& s, const GateMatrix& u, const std::vector<int>& t) {
        return apply_unitary(s, u, t);
      },
      py::arg("state"), py::arg("u"), py::arg("targets"));
  m.def("to_density", &to_density, py::arg("state"));
  m.def("tensor_with", &tensor_with, py::arg("rho"), py::arg("sigma"));
  m.def("partial_trace", &partial_trace, py::arg("rho"), py::arg("traced"));
  m.def("expect_z", py::overload_cast<const PureState&, int>(&expect_z),
        py::arg("state"), py::arg("qubit"));
  m.def("expect_z", py::overload_cast<const MixedState&, int>(&expect_z),
        py::arg("state"), py::arg("qubit"));

  // --- circuit ---------------------------------------------------------------
  py::enum_<UpsampleMode>(m, "UpsampleMode")
      .value("SHARED", UpsampleMode::kShared)
      .value("PER_SITE", UpsampleMode::kPerSite);
  py::enum_<UpsampleGateKind>(m, "UpsampleGateKind")
      .value("FULL_SU4", UpsampleGateKind::kFullSu4)
      .value("CONTROLLED_SU2", UpsampleGateKind::kControlledSu2);

  py::class_<ArchitectureConfig>(m, "ArchitectureConfig")
      .def(py::init<>())
      .def_readwrite("n_qubits", &ArchitectureConfig::n_qubits)
      .def_readwrite("pool_schedule", &ArchitectureConfig::pool_schedule)
      .def_readwrite("upsample_schedule",
                     &ArchitectureConfig::upsample_schedule)
      .def_readwrite("conv_reps_per_stage",
                     &ArchitectureConfig::conv_reps_per_stage)
      .def_readwrite("upsample_mode", &ArchitectureConfig::upsample_mode)
      .def_readwrite("upsample_gate_kind",
                     &ArchitectureConfig::upsample_gate_kind);

  py::class_<ParamSlice>(m, "ParamSlice")
      .def_readonly("name", &ParamSlice::name)
      .def_readonly("offset", &ParamSlice::offset)
      .def_readonly("length", &ParamSlice::length);

  py::class_<CircuitSpec>(m, "CircuitSpec")
      .def_readonly("n_qubits", &CircuitSpec::n_qubits)
      .def_readonly("bottleneck_width", &CircuitSpec::bottleneck_width)
      .def_property_readonly(
          "n_params",
          [](const CircuitSpec& spec) { return spec.layout.total(); })
      .def_property_readonly("slices", [](const CircuitSpec& spec) {
        return spec.layout.slices;
      });

  m.def("build_qfcn", &build_qfcn, py::arg("config"));
  m.def("truncate_at_bottleneck", &truncate_at_bottleneck, py::arg("spec"));
  m.def("brickwork_pairs", &brickwork_pairs, py::arg("width"), py::arg("rep"));
  m.def(
      "encode",
      [](const std::vector<double>& x, int n_qubits) {
        return encode(x, n_qubits);
      },
      py::arg("x"), py::arg("n_qubits"));
  m.def(
      "forward",
      [](const CircuitSpec& spec, std::vector<double> values,
         const std::vector<double>& x) {
        return forward(spec, bind_values(spec, std::move(values)), x);
      },
      py::arg("spec"), py::arg("values"), py::arg("x"),
      "per-qubit <Z> readout of the full pipeline");
  m.def(
      "forward_qcnn",
      [](const CircuitSpec& spec, std::vector<double> values,
         const std::vector<double>& x) {
        return forward_qcnn(spec, bind_values(spec, std::move(values)), x);
      },
      py::arg("spec"), py::arg("values"), py::arg("x"),
      "bottleneck <Z> readout of the encoder prefix");

  // --- data ------------------------------------------------------------------
  py::class_<Sample>(m, "Sample")
      .def_readonly("x", &Sample::x)
      .def_readonly("labels", &Sample::labels);

  py::class_<DatasetMeta>(m, "DatasetMeta")
      .def(py::init<>())
      .def_readwrite("seed", &DatasetMeta::seed)
      .def_readwrite("noise_sigma", &DatasetMeta::noise_sigma)
      .def_readwrite("theta_a", &DatasetMeta::theta_a)
      .def_readwrite("theta_b", &DatasetMeta::theta_b)
      .def_readwrite("n_qubits", &DatasetMeta::n_qubits);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("samples", &Dataset::samples)
      .def_readonly("meta", &Dataset::meta);

  m.def("gen_dataset",
        py::overload_cast<int, std::uint64_t, double, double, double, int>(
            &gen_dataset),
        py::arg("n_samples"), py::arg("seed"), py::arg("noise_sigma"),
        py::arg("theta_a") = std::numbers::pi / 4,
        py::arg("theta_b") = 3 * std::numbers::pi / 4, py::arg("n_qubits") = 8);
  m.def("serialize_dataset", &serialize_dataset, py::arg("dataset"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("fnv1a64", [](const std::string& bytes) { return fnv1a64(bytes); },
        py::arg("bytes"));

  // --- training ----------------------------------------------------------------
  py::enum_<GradMethod>(m, "GradMethod")
      .value("CENTRAL_FD", GradMethod::kCentralFd)
      .value("PARAM_SHIFT", GradMethod::kParamShift);
  py::enum_<StopReason>(m, "StopReason")
      .value("TOLERANCE_MET", StopReason::kToleranceMet)
      .value("MAX_EPOCHS", StopReason::kMaxEpochs);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("step_size", &TrainConfig::step_size)
      .def_readwrite("tolerance", &TrainConfig::tolerance)
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("grad_method", &TrainConfig::grad_method)
      .def_readwrite("fd_step", &TrainConfig::fd_step)
      .def_readwrite("init_scale", &TrainConfig::init_scale)
      .def_readwrite("init_seed", &TrainConfig::init_seed)
      .def_readwrite("trainable", &TrainConfig::trainable);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &EpochRecord::epoch)
      .def_readonly("loss", &EpochRecord::loss)
      .def_readonly("accuracy", &EpochRecord::accuracy)
      .def_readonly("elapsed_ms", &EpochRecord::elapsed_ms);

  py::class_<TrainingTrace>(m, "TrainingTrace")
      .def_readonly("initial_loss", &TrainingTrace::initial_loss)
      .def_readonly("initial_accuracy", &TrainingTrace::initial_accuracy)
      .def_readonly("records", &TrainingTrace::records)
      .def_readonly("stop_reason", &TrainingTrace::stop_reason);

  m.def("mse_loss", &mse_loss, py::arg("predictions"), py::arg("targets"));
  m.def("accuracy", &accuracy, py::arg("predictions"), py::arg("targets"));
  m.def(
      "grad_param_shift",
      [](const CircuitSpec& spec, std::vector<double> values,
         const Dataset& batch) {
        return grad_param_shift(spec, bind_values(spec, std::move(values)),
                                batch);
      },
      py::arg("spec"), py::arg("values"), py::arg("batch"),
      "exact full-batch MSE gradient via the shift rule");
  m.def(
      "train",
      [](const CircuitSpec& spec, const Dataset& ds, const TrainConfig& cfg) {
        auto [params, trace] = train(spec, ds, cfg);
        return py::make_tuple(params.values, trace);
      },
      py::arg("spec"), py::arg("dataset"), py::arg("config"),
      "returns (values, trace)");

  // --- hybrid ------------------------------------------------------------------
  py::class_<ClassicalHead>(m, "ClassicalHead")
      .def_readwrite("weights", &ClassicalHead::weights)
      .def_readwrite("biases", &ClassicalHead::biases)
      .def_property_readonly("n_in", &ClassicalHead::n_in)
      .def_property_readonly("n_out", &ClassicalHead::n_out);

  m.def("make_head", &make_head, py::arg("n_in"), py::arg("n_out"));
  m.def("head_param_count", &head_param_count, py::arg("n_in"),
        py::arg("n_out"));
  m.def(
      "head_from_params",
      [](const std::vector<double>& values, int n_in, int n_out) {
        return head_from_params(values, n_in, n_out);
      },
      py::arg("values"), py::arg("n_in"), py::arg("n_out"));
  m.def(
      "classical_upsample",
      [](const std::vector<double>& r, const ClassicalHead& head) {
        return classical_upsample(r, head);
      },
      py::arg("r"), py::arg("head"));
  m.def(
      "train_hybrid",
      [](const CircuitSpec& spec, const Dataset& ds, const TrainConfig& cfg) {
        auto [params, trace] = train_hybrid(spec, ds, cfg);
        return py::make_tuple(params.values, trace);
      },
      py::arg("spec"), py::arg("dataset"), py::arg("config"),
      "returns (values, trace); spec must be truncated at the bottleneck");

  py::enum_<Experiment>(m, "Experiment")
      .value("HYBRID_VS_PURE", Experiment::kHybridVsPure)
      .value("SHARED_VS_PER_SITE", Experiment::kSharedVsPerSite);

  py::class_<ArmReport>(m, "ArmReport")
      .def_readonly("name", &ArmReport::name)
      .def_readonly("n_params", &ArmReport::n_params)
      .def_readonly("dataset_checksum", &ArmReport::dataset_checksum)
      .def_readonly("trace", &ArmReport::trace);

  py::class_<ComparisonReport>(m, "ComparisonReport")
      .def_readonly("experiment", &ComparisonReport::experiment)
      .def_readonly("dataset_meta", &ComparisonReport::dataset_meta)
      .def_readonly("n_samples", &ComparisonReport::n_samples)
      .def_readonly("architecture", &ComparisonReport::architecture)
      .def_readonly("training", &ComparisonReport::training)
      .def_readonly("arms", &ComparisonReport::arms)
      .def_readonly("observations", &ComparisonReport::observations);

  m.def("compare_models", &compare_models, py::arg("experiment"),
        py::arg("dataset"), py::arg("architecture"), py::arg("config"));
}

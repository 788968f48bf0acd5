// QFCN/QCNN assembly and evaluation: cluster-state data encoding,
// shared-parameter convolution layers, partial-trace pooling, ancilla
// upsampling, and all-qubit Z readout.
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qfcn/gates.hpp"
#include "qfcn/state.hpp"

namespace qfcn {

enum class UpsampleMode { kShared, kPerSite };
enum class UpsampleGateKind { kFullSu4, kControlledSu2 };

// How a parameter enters its gate; selects the exact shift rule during
// gradient evaluation.
enum class ParamKind {
  kRotationHalf,        // exp(-i theta sigma / 2): frequency 1
  kCanonicalFull,       // exp(i theta P x P): frequency 2
  kControlledRotation,  // controlled exp(-i theta sigma / 2): frequencies 1/2, 1
  kClassical,           // not a gate angle; finite differences only
};

struct ArchitectureConfig {
  int n_qubits = 8;
  // Kept positions per pooling stage, indexed within that stage's qubits.
  // Default keeps the even positions twice: widths 8 -> 4 -> 2.
  std::vector<std::vector<int>> pool_schedule = {{0, 2, 4, 6}, {0, 2}};
  // Ancillas appended per upsampling stage; each batch pairs one-to-one with
  // the current qubits, doubling the width. Default restores 2 -> 4 -> 8.
  std::vector<int> upsample_schedule = {2, 4};
  int conv_reps_per_stage = 1;
  UpsampleMode upsample_mode = UpsampleMode::kShared;
  UpsampleGateKind upsample_gate_kind = UpsampleGateKind::kFullSu4;
};

// Layer descriptors. Widths are recorded at build time so evaluators and
// tests can bookkeep without re-deriving the schedule.
struct EncodeLayer {
  int width = 0;
};
struct ConvLayer {
  int stage = 0;
  int width = 0;
  int reps = 1;
  std::string slice;  // name of the shared 15-parameter block
};
struct PoolLayer {
  int stage = 0;
  int width_in = 0;
  std::vector<int> keep;  // ascending positions within the incoming width
};
struct UpsampleLayer {
  int stage = 0;
  int width_in = 0;
  int n_ancillas = 0;
  UpsampleMode mode = UpsampleMode::kShared;
  UpsampleGateKind kind = UpsampleGateKind::kFullSu4;
  std::string slice;
};
struct ReadoutLayer {
  int width = 0;
};

using Layer =
    std::variant<EncodeLayer, ConvLayer, PoolLayer, UpsampleLayer, ReadoutLayer>;

struct ParamSlice {
  std::string name;
  int offset = 0;
  int length = 0;
};

// Named, disjoint, contiguous slices covering [0, total), plus the shift-rule
// kind of every single parameter.
struct ParamLayout {
  std::vector<ParamSlice> slices;
  std::vector<ParamKind> kinds;

  int total() const { return static_cast<int>(kinds.size()); }
  const ParamSlice& slice(std::string_view name) const;  // throws if absent
};

struct CircuitSpec {
  int n_qubits = 0;          // encode width; also the QFCN readout width
  int bottleneck_width = 0;  // width after the last pooling layer
  std::vector<Layer> layers;
  ParamLayout layout;
};

struct ParamVector {
  std::vector<double> values;
  ParamLayout layout;

  std::span<const double> slice(std::string_view name) const;
};

// Binds values to the spec's layout; validates the length.
ParamVector make_params(const CircuitSpec& spec, std::vector<double> values);
ParamVector zero_params(const CircuitSpec& spec);

// Assembles Encode -> [Conv, Pool]* -> Upsample* -> Readout from the config,
// publishing the parameter layout. Slice names are conv<stage> and
// up<stage>; a per-site upsample slice holds the sites' sub-blocks
// back to back (site j at offset 15*j, or 3*j for controlled_su2).
CircuitSpec build_qfcn(const ArchitectureConfig& cfg);

// Encoder prefix of a built spec: everything through the last pooling layer,
// reading out at the bottleneck. The layout keeps only the conv slices.
CircuitSpec truncate_at_bottleneck(const CircuitSpec& spec);

// Pairing for one repetition of a conv layer: even repetitions couple
// (0,1),(2,3),...; odd repetitions couple the offset pairs (1,2),(3,4),....
std::vector<std::pair<int, int>> brickwork_pairs(int width, int rep);

// Cluster-state preparation followed by RX(x_q) on every qubit q.
PureState encode(std::span<const double> x, int n_qubits);

// su4(theta_slice) applied to every pair in order (15 shared parameters).
MixedState conv_layer(const MixedState& rho, std::span<const double> theta_slice,
                      const std::vector<std::pair<int, int>>& pairs);

// Partial trace over the complement of `keep` (a proper nonempty subset of
// positions); kept qubits retain their relative order.
MixedState pool_layer(const MixedState& rho, const std::vector<int>& keep);

struct UpsampleStageCfg {
  int n_ancillas = 0;
  UpsampleMode mode = UpsampleMode::kShared;
  UpsampleGateKind kind = UpsampleGateKind::kFullSu4;
};

// rho -> rho (x) cluster(ancillas), then one coupling gate per (source j,
// ancilla j) pair, then interleaving: source j -> position 2j, ancilla j ->
// position 2j+1. Output width is twice the input width.
MixedState upsample_layer(const MixedState& rho,
                          std::span<const double> theta_slice,
                          const UpsampleStageCfg& stage_cfg);

// Reorders qubits: qubit q moves to position new_positions[q].
MixedState permute_qubits(const MixedState& rho,
                          const std::vector<int>& new_positions);

// Full pipeline readout: per-qubit <Z> after the final layer, length
// spec.n_qubits for a QFCN spec. Deterministic pure function.
std::vector<double> forward(const CircuitSpec& spec, const ParamVector& theta,
                            std::span<const double> x);

// Encoder-only readout: runs layers up to the first upsample (or readout) and
// returns the bottleneck qubits' <Z>, length spec.bottleneck_width.
std::vector<double> forward_qcnn(const CircuitSpec& spec,
                                 const ParamVector& theta,
                                 std::span<const double> x);

namespace detail {
// A shared parameter enters one gate per brickwork pair (and per repetition,
// and per coupling site), so d<Z>/dtheta is the sum over those occurrences of
// single-occurrence derivatives; the shift rule is only exact applied to one
// occurrence at a time. These hooks evaluate the circuit with `delta` added
// to parameter `param` at its `occurrence`-th reading gate only, leaving the
// other occurrences at the tied value.
struct OccurrenceShift {
  int param = 0;
  double delta = 0.0;
  int occurrence = 0;
};

std::vector<double> forward_shifted(const CircuitSpec& spec,
                                    const ParamVector& theta,
                                    std::span<const double> x,
                                    const OccurrenceShift& shift,
                                    bool stop_at_bottleneck);

// How many gates read each parameter (brickwork repetitions included).
std::vector<int> occurrence_counts(const CircuitSpec& spec);
} // namespace detail

} // namespace qfcn

#include "qfcn/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qfcn {

namespace {

// Parameter kinds of one su4 block: two Euler triples, the canonical
// exponents, two more Euler triples.
void append_su4_kinds(std::vector<ParamKind>& kinds) {
  for (int i = 0; i < 6; ++i) kinds.push_back(ParamKind::kRotationHalf);
  for (int i = 0; i < 3; ++i) kinds.push_back(ParamKind::kCanonicalFull);
  for (int i = 0; i < 6; ++i) kinds.push_back(ParamKind::kRotationHalf);
}

int upsample_block_len(UpsampleGateKind kind) {
  return kind == UpsampleGateKind::kFullSu4 ? 15 : 3;
}

int upsample_slice_len(int sites, UpsampleMode mode, UpsampleGateKind kind) {
  const int block = upsample_block_len(kind);
  return mode == UpsampleMode::kPerSite ? block * sites : block;
}

// The coupling gate for one (source, ancilla) site. In shared mode every
// site reads the same leading block of the slice.
GateMatrix coupling_gate(std::span<const double> slice, int site,
                         UpsampleMode mode, UpsampleGateKind kind) {
  const int block = upsample_block_len(kind);
  const int base = mode == UpsampleMode::kPerSite ? block * site : 0;
  const auto sub = slice.subspan(base, block);
  if (kind == UpsampleGateKind::kFullSu4) return su4(sub);
  return controlled(euler_zyz(sub[0], sub[1], sub[2]));
}

// Interleaving permutation after an upsample on w sources: source j moves to
// position 2j, ancilla j (at w + j) moves to position 2j + 1.
std::vector<int> interleave_positions(int w) {
  std::vector<int> new_pos(2 * w);
  for (int j = 0; j < w; ++j) {
    new_pos[j] = 2 * j;
    new_pos[w + j] = 2 * j + 1;
  }
  return new_pos;
}

// Basis-index relabeling table for a qubit permutation.
std::vector<std::size_t> permutation_table(int n,
                                           const std::vector<int>& new_pos) {
  if (new_pos.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("permute_qubits: got " +
                                std::to_string(new_pos.size()) +
                                " positions for " + std::to_string(n) +
                                " qubits");
  }
  std::vector<bool> seen(n, false);
  for (int p : new_pos) {
    if (p < 0 || p >= n || seen[p]) {
      throw std::invalid_argument(
          "permute_qubits: positions are not a permutation");
    }
    seen[p] = true;
  }
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::size_t> table(dim, 0);
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t out = 0;
    for (int q = 0; q < n; ++q) {
      if (i & qubit_mask(n, q)) out |= qubit_mask(n, new_pos[q]);
    }
    table[i] = out;
  }
  return table;
}

void check_keep_set(int width, const std::vector<int>& keep,
                    const char* what) {
  if (keep.empty()) {
    throw std::invalid_argument(std::string(what) + ": keep set is empty");
  }
  std::vector<bool> seen(width, false);
  for (int q : keep) {
    if (q < 0 || q >= width) {
      throw std::invalid_argument(std::string(what) + ": kept position " +
                                  std::to_string(q) +
                                  " outside width " + std::to_string(width));
    }
    if (seen[q]) {
      throw std::invalid_argument(std::string(what) + ": duplicate position " +
                                  std::to_string(q));
    }
    seen[q] = true;
  }
  if (keep.size() >= static_cast<std::size_t>(width)) {
    throw std::invalid_argument(std::string(what) +
                                ": keep set must be a proper subset");
  }
}

std::vector<int> complement_of(int width, const std::vector<int>& keep) {
  std::vector<bool> kept(width, false);
  for (int q : keep) kept[q] = true;
  std::vector<int> traced;
  for (int q = 0; q < width; ++q) {
    if (!kept[q]) traced.push_back(q);
  }
  return traced;
}

} // namespace

const ParamSlice& ParamLayout::slice(std::string_view name) const {
  for (const ParamSlice& s : slices) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("parameter layout has no slice named '" +
                              std::string(name) + "'");
}

std::span<const double> ParamVector::slice(std::string_view name) const {
  const ParamSlice& s = layout.slice(name);
  return std::span<const double>(values).subspan(s.offset, s.length);
}

ParamVector make_params(const CircuitSpec& spec, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(spec.layout.total())) {
    throw std::invalid_argument("parameter vector length " +
                                std::to_string(values.size()) +
                                " does not match layout total " +
                                std::to_string(spec.layout.total()));
  }
  return ParamVector{std::move(values), spec.layout};
}

ParamVector zero_params(const CircuitSpec& spec) {
  return ParamVector{std::vector<double>(spec.layout.total(), 0.0),
                     spec.layout};
}

CircuitSpec build_qfcn(const ArchitectureConfig& cfg) {
  if (cfg.n_qubits < 1 || cfg.n_qubits > kMaxQubits) {
    throw std::invalid_argument("build_qfcn: n_qubits " +
                                std::to_string(cfg.n_qubits) +
                                " outside [1, " + std::to_string(kMaxQubits) +
                                "]");
  }
  if (cfg.conv_reps_per_stage < 1) {
    throw std::invalid_argument("build_qfcn: conv_reps_per_stage must be >= 1");
  }

  CircuitSpec spec;
  spec.n_qubits = cfg.n_qubits;
  spec.layers.push_back(EncodeLayer{cfg.n_qubits});

  int width = cfg.n_qubits;
  int offset = 0;

  for (std::size_t s = 0; s < cfg.pool_schedule.size(); ++s) {
    const std::string stage_tag = std::to_string(s);
    std::vector<int> keep = cfg.pool_schedule[s];
    check_keep_set(width, keep, ("build_qfcn: pool stage " + stage_tag).c_str());
    std::sort(keep.begin(), keep.end());

    const std::string slice_name = "conv" + stage_tag;
    spec.layers.push_back(
        ConvLayer{static_cast<int>(s), width, cfg.conv_reps_per_stage,
                  slice_name});
    spec.layout.slices.push_back(ParamSlice{slice_name, offset, 15});
    append_su4_kinds(spec.layout.kinds);
    offset += 15;

    spec.layers.push_back(PoolLayer{static_cast<int>(s), width, keep});
    width = static_cast<int>(keep.size());
  }

  spec.bottleneck_width = width;

  for (std::size_t t = 0; t < cfg.upsample_schedule.size(); ++t) {
    const int n_anc = cfg.upsample_schedule[t];
    if (n_anc != width) {
      throw std::invalid_argument(
          "build_qfcn: upsample stage " + std::to_string(t) + " adds " +
          std::to_string(n_anc) + " ancillas, which cannot pair one-to-one "
          "with the current width " + std::to_string(width));
    }
    if (2 * width > kMaxQubits) {
      throw std::invalid_argument("build_qfcn: upsample stage " +
                                  std::to_string(t) + " would exceed the " +
                                  std::to_string(kMaxQubits) +
                                  "-qubit budget");
    }

    const std::string slice_name = "up" + std::to_string(t);
    spec.layers.push_back(UpsampleLayer{static_cast<int>(t), width, n_anc,
                                        cfg.upsample_mode,
                                        cfg.upsample_gate_kind, slice_name});
    const int len =
        upsample_slice_len(width, cfg.upsample_mode, cfg.upsample_gate_kind);
    spec.layout.slices.push_back(ParamSlice{slice_name, offset, len});
    const int repeats =
        cfg.upsample_mode == UpsampleMode::kPerSite ? width : 1;
    for (int r = 0; r < repeats; ++r) {
      if (cfg.upsample_gate_kind == UpsampleGateKind::kFullSu4) {
        append_su4_kinds(spec.layout.kinds);
      } else {
        for (int i = 0; i < 3; ++i) {
          spec.layout.kinds.push_back(ParamKind::kControlledRotation);
        }
      }
    }
    offset += len;
    width *= 2;
  }

  if (width != cfg.n_qubits) {
    throw std::invalid_argument(
        "build_qfcn: schedules are not mirror-consistent: final width " +
        std::to_string(width) + " != n_qubits " +
        std::to_string(cfg.n_qubits));
  }

  spec.layers.push_back(ReadoutLayer{width});
  return spec;
}

CircuitSpec truncate_at_bottleneck(const CircuitSpec& spec) {
  CircuitSpec out;
  out.n_qubits = spec.n_qubits;
  out.bottleneck_width = spec.bottleneck_width;

  int kept_params = 0;
  for (const Layer& layer : spec.layers) {
    if (std::holds_alternative<UpsampleLayer>(layer) ||
        std::holds_alternative<ReadoutLayer>(layer)) {
      break;
    }
    out.layers.push_back(layer);
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      out.layout.slices.push_back(spec.layout.slice(conv->slice));
      kept_params += out.layout.slices.back().length;
    }
  }
  out.layers.push_back(ReadoutLayer{spec.bottleneck_width});
  out.layout.kinds.assign(spec.layout.kinds.begin(),
                          spec.layout.kinds.begin() + kept_params);
  return out;
}

std::vector<std::pair<int, int>> brickwork_pairs(int width, int rep) {
  std::vector<std::pair<int, int>> pairs;
  for (int q = rep % 2; q + 1 < width; q += 2) {
    pairs.emplace_back(q, q + 1);
  }
  return pairs;
}

PureState encode(std::span<const double> x, int n_qubits) {
  if (x.size() != static_cast<std::size_t>(n_qubits)) {
    throw std::invalid_argument("encode: got " + std::to_string(x.size()) +
                                " angles for " + std::to_string(n_qubits) +
                                " qubits");
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("encode: non-finite angle");
    }
  }
  Eigen::VectorXcd amps = prepare_cluster_state(n_qubits).amplitudes();
  for (int q = 0; q < n_qubits; ++q) {
    const int targets[] = {q};
    detail::apply_gate_inplace(amps, n_qubits, rotation(Axis::X, x[q]),
                               targets);
  }
  return PureState(n_qubits, std::move(amps));
}

MixedState conv_layer(const MixedState& rho,
                      std::span<const double> theta_slice,
                      const std::vector<std::pair<int, int>>& pairs) {
  if (theta_slice.size() != 15) {
    throw std::invalid_argument("conv_layer: slice has " +
                                std::to_string(theta_slice.size()) +
                                " parameters, expected 15");
  }
  const GateMatrix gate = su4(theta_slice);
  MixedState out = rho;
  for (const auto& [a, b] : pairs) {
    const int targets[] = {a, b};
    out = apply_unitary(out, gate, targets);
  }
  return out;
}

MixedState pool_layer(const MixedState& rho, const std::vector<int>& keep) {
  check_keep_set(rho.n_qubits(), keep, "pool_layer");
  return partial_trace(rho, complement_of(rho.n_qubits(), keep));
}

MixedState upsample_layer(const MixedState& rho,
                          std::span<const double> theta_slice,
                          const UpsampleStageCfg& stage_cfg) {
  const int w = rho.n_qubits();
  if (stage_cfg.n_ancillas != w) {
    throw std::invalid_argument(
        "upsample_layer: " + std::to_string(stage_cfg.n_ancillas) +
        " ancillas cannot pair one-to-one with width " + std::to_string(w));
  }
  const int expected =
      upsample_slice_len(w, stage_cfg.mode, stage_cfg.kind);
  if (theta_slice.size() != static_cast<std::size_t>(expected)) {
    throw std::invalid_argument("upsample_layer: slice has " +
                                std::to_string(theta_slice.size()) +
                                " parameters, expected " +
                                std::to_string(expected));
  }

  MixedState sigma =
      tensor_with(rho, to_density(prepare_cluster_state(w)));
  for (int j = 0; j < w; ++j) {
    const GateMatrix gate =
        coupling_gate(theta_slice, j, stage_cfg.mode, stage_cfg.kind);
    const int targets[] = {j, w + j};
    sigma = apply_unitary(sigma, gate, targets);
  }
  return permute_qubits(sigma, interleave_positions(w));
}

MixedState permute_qubits(const MixedState& rho,
                          const std::vector<int>& new_positions) {
  const int n = rho.n_qubits();
  const std::vector<std::size_t> table = permutation_table(n, new_positions);
  const Eigen::MatrixXcd& in = rho.matrix();
  Eigen::MatrixXcd out(in.rows(), in.cols());
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    for (Eigen::Index j = 0; j < in.cols(); ++j) {
      out(table[i], table[j]) = in(i, j);
    }
  }
  return MixedState(n, std::move(out));
}

namespace {

void validate_spec(const CircuitSpec& spec) {
  if (spec.layers.size() < 2 ||
      !std::holds_alternative<EncodeLayer>(spec.layers.front()) ||
      !std::holds_alternative<ReadoutLayer>(spec.layers.back())) {
    throw std::invalid_argument(
        "circuit spec must start with Encode and end with Readout");
  }
  for (std::size_t i = 1; i + 1 < spec.layers.size(); ++i) {
    if (std::holds_alternative<EncodeLayer>(spec.layers[i]) ||
        std::holds_alternative<ReadoutLayer>(spec.layers[i])) {
      throw std::invalid_argument(
          "circuit spec has an interior Encode or Readout layer");
    }
  }
  int offset = 0;
  for (const ParamSlice& s : spec.layout.slices) {
    if (s.offset != offset || s.length < 0) {
      throw std::invalid_argument(
          "parameter layout slices are not contiguous from zero");
    }
    offset += s.length;
  }
  if (offset != spec.layout.total()) {
    throw std::invalid_argument(
        "parameter layout slices do not cover the parameter vector");
  }
}

// Working representation of the pipeline state. The evaluator keeps the
// cheapest faithful form at every stage:
//   - kPure: amplitudes, from encoding until the first pool;
//   - kMixed: a density matrix over the (small) pooled register;
//   - kEnsemble: after the first upsample, the frozen bottleneck weight
//     matrix rho_b plus one evolving pure vector per bottleneck basis state.
//     rho_full = sum_ij rho_b(i,j) |v_i><v_j|, so unitary layers act on the
//     v_i alone and readout needs only diag(V rho_b V^dag).
enum class Rep { kPure, kMixed, kEnsemble };

struct Work {
  Rep rep = Rep::kPure;
  int width = 0;
  Eigen::VectorXcd pure;
  Eigen::MatrixXcd mixed;  // kMixed: the state; kEnsemble: the weights rho_b
  std::vector<Eigen::VectorXcd> basis;
};

Eigen::VectorXcd kron_vec(const Eigen::VectorXcd& a,
                          const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a[i] * b;
  }
  return out;
}

void check_layer_width(int declared, int actual, const char* layer) {
  if (declared != actual) {
    throw std::invalid_argument(std::string(layer) + " layer declares width " +
                                std::to_string(declared) +
                                " but the state has width " +
                                std::to_string(actual));
  }
}

void apply_everywhere(Work& w, const GateMatrix& gate,
                      std::span<const int> targets) {
  switch (w.rep) {
    case Rep::kPure:
      detail::apply_gate_inplace(w.pure, w.width, gate, targets);
      break;
    case Rep::kMixed:
      detail::conjugate_inplace(w.mixed, w.width, gate, targets);
      break;
    case Rep::kEnsemble:
      for (Eigen::VectorXcd& v : w.basis) {
        detail::apply_gate_inplace(v, w.width, gate, targets);
      }
      break;
  }
}

// Tracks a pending single-occurrence parameter nudge across the layer walk.
// `seen` counts the logical gates that read the shifted parameter, in
// application order; the gate whose count equals `occurrence` is built from
// the nudged value, every other gate from the tied value.
struct ShiftCursor {
  detail::OccurrenceShift shift;
  int seen = 0;

  // Whether the reading gate just counted is the one to nudge.
  bool take() { return seen++ == shift.occurrence; }
};

// The slice values with the cursor's nudge applied, for one gate build.
std::vector<double> nudged_values(std::span<const double> slice,
                                  int index_in_slice, double delta) {
  std::vector<double> vals(slice.begin(), slice.end());
  vals[index_in_slice] += delta;
  return vals;
}

void run_conv(Work& w, const ConvLayer& layer, const ParamVector& theta,
              ShiftCursor* cursor) {
  check_layer_width(layer.width, w.width, "conv");
  const ParamSlice& meta = theta.layout.slice(layer.slice);
  const std::span<const double> slice = theta.slice(layer.slice);
  const bool reads = cursor != nullptr && cursor->shift.param >= meta.offset &&
                     cursor->shift.param < meta.offset + meta.length;
  const GateMatrix gate = su4(slice);
  GateMatrix nudged;
  for (int rep = 0; rep < layer.reps; ++rep) {
    for (const auto& [a, b] : brickwork_pairs(w.width, rep)) {
      const GateMatrix* g = &gate;
      if (reads && cursor->take()) {
        nudged = su4(nudged_values(slice, cursor->shift.param - meta.offset,
                                   cursor->shift.delta));
        g = &nudged;
      }
      const int targets[] = {a, b};
      apply_everywhere(w, *g, targets);
    }
  }
}

void run_pool(Work& w, const PoolLayer& layer) {
  check_layer_width(layer.width_in, w.width, "pool");
  check_keep_set(w.width, layer.keep, "pool");
  const std::vector<int> traced = complement_of(w.width, layer.keep);
  switch (w.rep) {
    case Rep::kPure:
      w.mixed = detail::reduce_pure(w.pure, w.width, traced);
      w.pure.resize(0);
      w.rep = Rep::kMixed;
      break;
    case Rep::kMixed:
      w.mixed = detail::partial_trace_matrix(w.mixed, w.width, traced);
      break;
    case Rep::kEnsemble:
      throw std::invalid_argument("pooling after upsampling is not supported");
  }
  w.width = static_cast<int>(layer.keep.size());
}

void run_upsample(Work& w, const UpsampleLayer& layer,
                  const ParamVector& theta, ShiftCursor* cursor) {
  check_layer_width(layer.width_in, w.width, "upsample");
  if (layer.n_ancillas != w.width) {
    throw std::invalid_argument(
        "upsample layer: " + std::to_string(layer.n_ancillas) +
        " ancillas cannot pair one-to-one with width " +
        std::to_string(w.width));
  }
  if (2 * w.width > kMaxQubits) {
    throw std::invalid_argument("upsample layer would exceed the " +
                                std::to_string(kMaxQubits) + "-qubit budget");
  }
  const std::span<const double> slice = theta.slice(layer.slice);
  const int expected = upsample_slice_len(w.width, layer.mode, layer.kind);
  if (slice.size() != static_cast<std::size_t>(expected)) {
    throw std::invalid_argument("upsample layer: slice has " +
                                std::to_string(slice.size()) +
                                " parameters, expected " +
                                std::to_string(expected));
  }

  const Eigen::VectorXcd cluster =
      prepare_cluster_state(w.width).amplitudes();

  // Attach the ancilla register (low bits) in whichever representation the
  // state is in; mixed states switch to the ensemble form here.
  switch (w.rep) {
    case Rep::kPure:
      w.pure = kron_vec(w.pure, cluster);
      break;
    case Rep::kMixed: {
      const Eigen::Index b = w.mixed.rows();
      w.basis.assign(b, Eigen::VectorXcd());
      for (Eigen::Index i = 0; i < b; ++i) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(b * cluster.size());
        v.segment(i * cluster.size(), cluster.size()) = cluster;
        w.basis[static_cast<std::size_t>(i)] = std::move(v);
      }
      w.rep = Rep::kEnsemble;
      break;
    }
    case Rep::kEnsemble:
      for (Eigen::VectorXcd& v : w.basis) v = kron_vec(v, cluster);
      break;
  }

  const int sources = w.width;
  w.width = 2 * sources;

  const ParamSlice& meta = theta.layout.slice(layer.slice);
  const int block = layer.kind == UpsampleGateKind::kFullSu4 ? 15 : 3;
  GateMatrix shared_gate;
  if (layer.mode == UpsampleMode::kShared) {
    shared_gate = coupling_gate(slice, 0, layer.mode, layer.kind);
  }
  GateMatrix site_gate;
  for (int j = 0; j < sources; ++j) {
    // Site j reads the whole slice in shared mode, its own sub-block in
    // per-site mode.
    const int base =
        layer.mode == UpsampleMode::kPerSite ? meta.offset + block * j
                                             : meta.offset;
    const bool reads = cursor != nullptr && cursor->shift.param >= base &&
                       cursor->shift.param < base + block;
    const GateMatrix* gate;
    if (reads && cursor->take()) {
      site_gate = coupling_gate(
          nudged_values(slice, cursor->shift.param - meta.offset,
                        cursor->shift.delta),
          j, layer.mode, layer.kind);
      gate = &site_gate;
    } else if (layer.mode == UpsampleMode::kShared) {
      gate = &shared_gate;
    } else {
      site_gate = coupling_gate(slice, j, layer.mode, layer.kind);
      gate = &site_gate;
    }
    const int targets[] = {j, sources + j};
    apply_everywhere(w, *gate, targets);
  }

  const std::vector<std::size_t> table =
      permutation_table(w.width, interleave_positions(sources));
  auto permute_vec = [&table](Eigen::VectorXcd& v) {
    Eigen::VectorXcd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[table[i]] = v[i];
    v = std::move(out);
  };
  if (w.rep == Rep::kPure) {
    permute_vec(w.pure);
  } else {
    for (Eigen::VectorXcd& v : w.basis) permute_vec(v);
  }
}

std::vector<double> read_out(const Work& w) {
  const int n = w.width;
  const std::size_t dim = std::size_t{1} << n;

  // Only the diagonal of the full density matrix enters Z expectations.
  Eigen::VectorXd diag(dim);
  switch (w.rep) {
    case Rep::kPure:
      diag = w.pure.cwiseAbs2();
      break;
    case Rep::kMixed:
      diag = w.mixed.diagonal().real();
      break;
    case Rep::kEnsemble: {
      const Eigen::Index b = w.mixed.rows();
      Eigen::MatrixXcd v(dim, b);
      for (Eigen::Index i = 0; i < b; ++i) {
        v.col(i) = w.basis[static_cast<std::size_t>(i)];
      }
      const Eigen::MatrixXcd weighted = v * w.mixed;
      diag = weighted.cwiseProduct(v.conjugate()).rowwise().sum().real();
      break;
    }
  }

  std::vector<double> y(n, 0.0);
  for (int q = 0; q < n; ++q) {
    const std::size_t mask = qubit_mask(n, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      sum += (i & mask) ? -diag[i] : diag[i];
    }
    y[q] = sum;
  }
  return y;
}

std::vector<double> evaluate(const CircuitSpec& spec, const ParamVector& theta,
                             std::span<const double> x,
                             bool stop_at_bottleneck, ShiftCursor* cursor) {
  validate_spec(spec);
  if (theta.values.size() != static_cast<std::size_t>(spec.layout.total())) {
    throw std::invalid_argument("parameter vector length " +
                                std::to_string(theta.values.size()) +
                                " does not match layout total " +
                                std::to_string(spec.layout.total()));
  }

  Work w;
  w.width = spec.n_qubits;
  w.pure = encode(x, spec.n_qubits).amplitudes();

  for (const Layer& layer : spec.layers) {
    if (std::holds_alternative<EncodeLayer>(layer)) continue;
    if (std::holds_alternative<ReadoutLayer>(layer)) break;
    if (stop_at_bottleneck && std::holds_alternative<UpsampleLayer>(layer)) {
      break;
    }
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      run_conv(w, *conv, theta, cursor);
    } else if (const auto* pool = std::get_if<PoolLayer>(&layer)) {
      run_pool(w, *pool);
    } else if (const auto* up = std::get_if<UpsampleLayer>(&layer)) {
      run_upsample(w, *up, theta, cursor);
    }
  }
  return read_out(w);
}

} // namespace

std::vector<double> forward(const CircuitSpec& spec, const ParamVector& theta,
                            std::span<const double> x) {
  return evaluate(spec, theta, x, false, nullptr);
}

std::vector<double> forward_qcnn(const CircuitSpec& spec,
                                 const ParamVector& theta,
                                 std::span<const double> x) {
  return evaluate(spec, theta, x, true, nullptr);
}

namespace detail {

std::vector<double> forward_shifted(const CircuitSpec& spec,
                                    const ParamVector& theta,
                                    std::span<const double> x,
                                    const OccurrenceShift& shift,
                                    bool stop_at_bottleneck) {
  if (shift.param < 0 || shift.param >= spec.layout.total()) {
    throw std::invalid_argument("forward_shifted: parameter index " +
                                std::to_string(shift.param) +
                                " outside layout total " +
                                std::to_string(spec.layout.total()));
  }
  ShiftCursor cursor{shift, 0};
  return evaluate(spec, theta, x, stop_at_bottleneck, &cursor);
}

std::vector<int> occurrence_counts(const CircuitSpec& spec) {
  std::vector<int> counts(spec.layout.total(), 0);
  const auto bump = [&counts](const ParamSlice& s, int uses) {
    for (int i = s.offset; i < s.offset + s.length; ++i) counts[i] += uses;
  };
  for (const Layer& layer : spec.layers) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      int uses = 0;
      for (int rep = 0; rep < conv->reps; ++rep) {
        uses += static_cast<int>(brickwork_pairs(conv->width, rep).size());
      }
      bump(spec.layout.slice(conv->slice), uses);
    } else if (const auto* up = std::get_if<UpsampleLayer>(&layer)) {
      // Shared: every site reads the slice. Per-site: each parameter sits in
      // exactly one site's sub-block.
      const int uses = up->mode == UpsampleMode::kShared ? up->width_in : 1;
      bump(spec.layout.slice(up->slice), uses);
    }
  }
  return counts;
}

} // namespace detail

} // namespace qfcn

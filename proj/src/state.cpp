#include "qfcn/state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfcn {

namespace {

void check_qubit_count(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit count " + std::to_string(n_qubits) +
                                " outside [1, " + std::to_string(kMaxQubits) +
                                "]");
  }
}

} // namespace

PureState::PureState(int n_qubits) : n_qubits_(n_qubits) {
  check_qubit_count(n_qubits);
  amplitudes_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  amplitudes_[0] = cplx(1.0, 0.0);
}

PureState::PureState(int n_qubits, Eigen::VectorXcd amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_qubit_count(n_qubits);
  if (amplitudes_.size() != (Eigen::Index{1} << n_qubits)) {
    throw std::invalid_argument("PureState: amplitude vector has length " +
                                std::to_string(amplitudes_.size()) +
                                ", expected 2^" + std::to_string(n_qubits));
  }
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-10) {
    throw std::invalid_argument("PureState: amplitudes are not normalized");
  }
}

MixedState::MixedState(int n_qubits, Eigen::MatrixXcd matrix)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
  check_qubit_count(n_qubits);
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw std::invalid_argument("MixedState: matrix is " +
                                std::to_string(matrix_.rows()) + "x" +
                                std::to_string(matrix_.cols()) +
                                ", expected 2^" + std::to_string(n_qubits) +
                                " square");
  }
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("MixedState: matrix is not Hermitian");
  }
  if (std::abs(matrix_.trace() - cplx(1.0, 0.0)) > 1e-10) {
    throw std::invalid_argument("MixedState: trace differs from one");
  }
}

double MixedState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

PureState new_pure(int n_qubits) { return PureState(n_qubits); }

PureState prepare_cluster_state(int n_qubits) {
  check_qubit_count(n_qubits);
  Eigen::VectorXcd amps =
      Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  amps[0] = cplx(1.0, 0.0);
  const GateMatrix h = named_gate("H");
  for (int q = 0; q < n_qubits; ++q) {
    const int targets[] = {q};
    detail::apply_gate_inplace(amps, n_qubits, h, targets);
  }
  const GateMatrix cz = named_gate("CZ");
  for (int q = 0; q + 1 < n_qubits; ++q) {
    const int targets[] = {q, q + 1};
    detail::apply_gate_inplace(amps, n_qubits, cz, targets);
  }
  return PureState(n_qubits, std::move(amps));
}

namespace detail {

void check_targets(int n_qubits, const GateMatrix& u,
                   std::span<const int> targets) {
  if (targets.empty()) {
    throw std::invalid_argument("gate application: no target qubits");
  }
  const Eigen::Index d = Eigen::Index{1} << targets.size();
  if (u.rows() != d || u.cols() != d) {
    throw std::invalid_argument(
        "gate application: matrix dimension " + std::to_string(u.rows()) +
        " does not match " + std::to_string(targets.size()) + " targets");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= n_qubits) {
      throw std::invalid_argument("gate application: target qubit " +
                                  std::to_string(targets[i]) +
                                  " out of range");
    }
    for (std::size_t j = i + 1; j < targets.size(); ++j) {
      if (targets[i] == targets[j]) {
        throw std::invalid_argument("gate application: duplicate target " +
                                    std::to_string(targets[i]));
      }
    }
  }
}

void apply_gate_inplace(Eigen::VectorXcd& amps, int n_qubits,
                        const GateMatrix& u, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::size_t d = std::size_t{1} << k;
  const std::size_t dim = std::size_t{1} << n_qubits;

  // Bit masks of the targets; targets[0] is the gate's most significant
  // qubit, so it maps to the high bit of the gate-local index.
  std::size_t target_union = 0;
  std::vector<std::size_t> gate_bit(d, 0);
  for (int j = 0; j < k; ++j) {
    const std::size_t mask = qubit_mask(n_qubits, targets[j]);
    target_union |= mask;
    const std::size_t local = std::size_t{1} << (k - 1 - j);
    for (std::size_t g = 0; g < d; ++g) {
      if (g & local) gate_bit[g] |= mask;
    }
  }

  Eigen::VectorXcd sub(d), out(d);
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & target_union) continue;
    for (std::size_t g = 0; g < d; ++g) sub[g] = amps[base | gate_bit[g]];
    out.noalias() = u * sub;
    for (std::size_t g = 0; g < d; ++g) amps[base | gate_bit[g]] = out[g];
  }
}

void conjugate_inplace(Eigen::MatrixXcd& m, int n_qubits, const GateMatrix& u,
                       std::span<const int> targets) {
  // U m U^dag, column by column: first m := U m, then the adjoint pass via
  // (U m) U^dag = conj( conj(U) conj(U m)^T )^T applied through transposes.
  Eigen::VectorXcd col(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    col = m.col(j);
    apply_gate_inplace(col, n_qubits, u, targets);
    m.col(j) = col;
  }
  Eigen::MatrixXcd mt = m.transpose();
  const GateMatrix uc = u.conjugate();
  for (Eigen::Index j = 0; j < mt.cols(); ++j) {
    col = mt.col(j);
    apply_gate_inplace(col, n_qubits, uc, targets);
    mt.col(j) = col;
  }
  m = mt.transpose();
}

} // namespace detail

PureState apply_unitary(const PureState& state, const GateMatrix& u,
                        std::span<const int> targets) {
  detail::check_targets(state.n_qubits(), u, targets);
  Eigen::VectorXcd amps = state.amplitudes();
  detail::apply_gate_inplace(amps, state.n_qubits(), u, targets);
  return PureState(state.n_qubits(), std::move(amps));
}

MixedState apply_unitary(const MixedState& rho, const GateMatrix& u,
                         std::span<const int> targets) {
  detail::check_targets(rho.n_qubits(), u, targets);
  Eigen::MatrixXcd m = rho.matrix();
  detail::conjugate_inplace(m, rho.n_qubits(), u, targets);
  return MixedState(rho.n_qubits(), std::move(m));
}

MixedState to_density(const PureState& state) {
  Eigen::MatrixXcd m = state.amplitudes() * state.amplitudes().adjoint();
  return MixedState(state.n_qubits(), std::move(m));
}

MixedState tensor_with(const MixedState& rho, const MixedState& sigma) {
  const int n = rho.n_qubits() + sigma.n_qubits();
  if (n > kMaxQubits) {
    throw std::invalid_argument("tensor_with: combined size " +
                                std::to_string(n) + " exceeds the " +
                                std::to_string(kMaxQubits) + "-qubit budget");
  }
  return MixedState(n, kron(rho.matrix(), sigma.matrix()));
}

namespace detail {

namespace {

// Scatter tables: bit patterns of the kept / traced sub-indices inside the
// full basis index. Kept qubits keep their relative order.
struct TraceTables {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> traced;
};

TraceTables make_trace_tables(int n, const std::vector<int>& traced_qubits) {
  if (traced_qubits.empty()) {
    throw std::invalid_argument("partial_trace: traced set is empty");
  }
  std::vector<bool> is_traced(n, false);
  for (int q : traced_qubits) {
    if (q < 0 || q >= n) {
      throw std::invalid_argument("partial_trace: qubit " + std::to_string(q) +
                                  " out of range");
    }
    if (is_traced[q]) {
      throw std::invalid_argument("partial_trace: duplicate qubit " +
                                  std::to_string(q));
    }
    is_traced[q] = true;
  }
  if (traced_qubits.size() == static_cast<std::size_t>(n)) {
    throw std::invalid_argument("partial_trace: cannot trace out all qubits");
  }

  std::vector<int> kept_pos, traced_pos;
  for (int q = 0; q < n; ++q) {
    (is_traced[q] ? traced_pos : kept_pos).push_back(q);
  }
  auto scatter = [&](const std::vector<int>& pos, std::size_t sub) {
    std::size_t full = 0;
    for (std::size_t j = 0; j < pos.size(); ++j) {
      if (sub & (std::size_t{1} << (pos.size() - 1 - j))) {
        full |= qubit_mask(n, pos[j]);
      }
    }
    return full;
  };

  TraceTables tables;
  tables.kept.resize(std::size_t{1} << kept_pos.size());
  tables.traced.resize(std::size_t{1} << traced_pos.size());
  for (std::size_t j = 0; j < tables.kept.size(); ++j) {
    tables.kept[j] = scatter(kept_pos, j);
  }
  for (std::size_t m = 0; m < tables.traced.size(); ++m) {
    tables.traced[m] = scatter(traced_pos, m);
  }
  return tables;
}

} // namespace

Eigen::MatrixXcd partial_trace_matrix(const Eigen::MatrixXcd& rho,
                                      int n_qubits,
                                      const std::vector<int>& traced) {
  const TraceTables tables = make_trace_tables(n_qubits, traced);
  const std::size_t dim_kept = tables.kept.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_kept, dim_kept);
  for (std::size_t j = 0; j < dim_kept; ++j) {
    for (std::size_t l = 0; l < dim_kept; ++l) {
      cplx sum(0.0, 0.0);
      for (std::size_t m : tables.traced) {
        sum += rho(tables.kept[j] | m, tables.kept[l] | m);
      }
      out(j, l) = sum;
    }
  }
  return out;
}

Eigen::MatrixXcd reduce_pure(const Eigen::VectorXcd& amps, int n_qubits,
                             const std::vector<int>& traced) {
  const TraceTables tables = make_trace_tables(n_qubits, traced);
  const std::size_t dim_kept = tables.kept.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_kept, dim_kept);
  for (std::size_t j = 0; j < dim_kept; ++j) {
    for (std::size_t l = 0; l < dim_kept; ++l) {
      cplx sum(0.0, 0.0);
      for (std::size_t m : tables.traced) {
        sum += amps[tables.kept[j] | m] * std::conj(amps[tables.kept[l] | m]);
      }
      out(j, l) = sum;
    }
  }
  return out;
}

} // namespace detail

MixedState partial_trace(const MixedState& rho,
                         const std::vector<int>& traced) {
  const int n_kept = rho.n_qubits() - static_cast<int>(traced.size());
  return MixedState(n_kept, detail::partial_trace_matrix(
                                rho.matrix(), rho.n_qubits(), traced));
}

double expect_z(const MixedState& rho, int qubit) {
  const int n = rho.n_qubits();
  if (qubit < 0 || qubit >= n) {
    throw std::invalid_argument("expect_z: qubit " + std::to_string(qubit) +
                                " out of range");
  }
  const std::size_t mask = qubit_mask(n, qubit);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rho.dim(); ++i) {
    const double sign = (static_cast<std::size_t>(i) & mask) ? -1.0 : 1.0;
    sum += sign * rho.matrix()(i, i).real();
  }
  return sum;
}

double expect_z(const PureState& state, int qubit) {
  const int n = state.n_qubits();
  if (qubit < 0 || qubit >= n) {
    throw std::invalid_argument("expect_z: qubit " + std::to_string(qubit) +
                                " out of range");
  }
  const std::size_t mask = qubit_mask(n, qubit);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < state.dim(); ++i) {
    const double sign = (static_cast<std::size_t>(i) & mask) ? -1.0 : 1.0;
    sum += sign * std::norm(state.amplitudes()[i]);
  }
  return sum;
}

} // namespace qfcn

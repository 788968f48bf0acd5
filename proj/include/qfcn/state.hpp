// State-vector and density-matrix representations with gate application,
// tensor product, partial trace, and Pauli-Z expectation readout.
//
// Indexing convention, used by every module: the basis index of the bit
// string b0 b1 ... b_{n-1} is sum_q b_q * 2^(n-1-q). Qubit 0 is the most
// significant bit.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qfcn/gates.hpp"

namespace qfcn {

// Simulator budget: 2^12 x 2^12 mixed states are the largest we allow.
inline constexpr int kMaxQubits = 12;

// Bit mask selecting qubit q inside an n-qubit basis index.
inline std::size_t qubit_mask(int n_qubits, int qubit) {
  return std::size_t{1} << (n_qubits - 1 - qubit);
}

// Normalized complex amplitude vector over n qubits.
class PureState {
 public:
  // |0...0>
  explicit PureState(int n_qubits);
  // Takes ownership of the amplitudes; validates length and normalization.
  PureState(int n_qubits, Eigen::VectorXcd amplitudes);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }

 private:
  int n_qubits_;
  Eigen::VectorXcd amplitudes_;
};

// Hermitian, unit-trace density matrix over n qubits.
class MixedState {
 public:
  // Validates dimensions, Hermiticity and unit trace. Positive
  // semidefiniteness is only checked on demand (min_eigenvalue).
  MixedState(int n_qubits, Eigen::MatrixXcd matrix);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  double min_eigenvalue() const;

 private:
  int n_qubits_;
  Eigen::MatrixXcd matrix_;
};

PureState new_pure(int n_qubits);

// 1-D open-chain cluster state: H on every qubit of |0...0>, then CZ on each
// neighbor pair (q, q+1).
PureState prepare_cluster_state(int n_qubits);

// Applies u to the listed qubits; targets[0] is the gate's most significant
// qubit. u must be 2^k x 2^k for k distinct in-range targets.
PureState apply_unitary(const PureState& state, const GateMatrix& u,
                        std::span<const int> targets);

// rho -> U rho U^dag with U the embedding of u on the targets.
MixedState apply_unitary(const MixedState& rho, const GateMatrix& u,
                         std::span<const int> targets);

// |psi><psi|
MixedState to_density(const PureState& state);

// Kronecker product; sigma's qubits are appended after rho's.
MixedState tensor_with(const MixedState& rho, const MixedState& sigma);

// Reduced state on the remaining qubits, which keep their relative order:
// out[j,l] = sum_n rho[(j,n),(l,n)] with n running over the traced qubits.
MixedState partial_trace(const MixedState& rho, const std::vector<int>& traced);

// Tr(Z_q rho), guaranteed real up to validation tolerance.
double expect_z(const MixedState& rho, int qubit);
double expect_z(const PureState& state, int qubit);

namespace detail {
// In-place k-qubit gate kernel on a raw 2^n amplitude vector. Shared by the
// state operations and the circuit evaluator.
void apply_gate_inplace(Eigen::VectorXcd& amps, int n_qubits,
                        const GateMatrix& u, std::span<const int> targets);
// U M U^dag on a raw 2^n x 2^n matrix, column kernels only (no embedded
// full-dimension unitary is formed).
void conjugate_inplace(Eigen::MatrixXcd& m, int n_qubits, const GateMatrix& u,
                       std::span<const int> targets);
void check_targets(int n_qubits, const GateMatrix& u,
                   std::span<const int> targets);
// Raw-matrix partial trace and its pure-state specialization: the circuit
// evaluator pools without constructing intermediate MixedState values.
Eigen::MatrixXcd partial_trace_matrix(const Eigen::MatrixXcd& rho,
                                      int n_qubits,
                                      const std::vector<int>& traced);
Eigen::MatrixXcd reduce_pure(const Eigen::VectorXcd& amps, int n_qubits,
                             const std::vector<int>& traced);
} // namespace detail

} // namespace qfcn

// Construction of the fixed and parameterized gate matrices used by the
// circuit layers: single-qubit rotations, ZYZ Euler unitaries, the
// 15-parameter two-qubit gate, controlled gates, and named constants.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <span>
#include <string_view>

namespace qfcn {

using cplx = std::complex<double>;

// All gates are square complex matrices whose dimension is a power of two.
using GateMatrix = Eigen::MatrixXcd;

enum class Axis { X, Y, Z };

// exp(-i theta sigma_axis / 2). The sign convention is fixed here once;
// every parameterized gate in the project is built from it.
GateMatrix rotation(Axis axis, double theta);

// RZ(z1) * RY(y) * RZ(z2). Applied to a state, the z2 rotation acts first.
GateMatrix euler_zyz(double z1, double y, double z2);

// exp(i (ax X(x)X + ay Y(x)Y + az Z(x)Z)). The three generators commute, so
// the exponential factors into three closed-form 4x4 terms.
GateMatrix canonical_interaction(double ax, double ay, double az);

// Parameters of the fully general two-qubit gate: local ZYZ Euler blocks
// around a canonical interaction core, 15 angles total.
struct Su4Params {
  std::array<double, 3> pre_a{};     // qubit-0 Euler angles, applied first
  std::array<double, 3> pre_b{};     // qubit-1 Euler angles, applied first
  std::array<double, 3> canonical{}; // interaction strengths (ax, ay, az)
  std::array<double, 3> post_a{};    // qubit-0 Euler angles, applied last
  std::array<double, 3> post_b{};    // qubit-1 Euler angles, applied last

  static Su4Params from_flat(std::span<const double> values); // 15 values
  std::array<double, 15> flat() const;
};

// (A1 (x) A2) * N(ax, ay, az) * (B1 (x) B2) with A/B the Euler blocks.
// Spans all of SU(4) up to global phase.
GateMatrix su4(const Su4Params& p);
GateMatrix su4(std::span<const double> flat15);

// Block-diagonal [[I, 0], [0, u]]. The control is the first (most
// significant) qubit of the enlarged gate. Rejects non-unitary input.
GateMatrix controlled(const GateMatrix& u);

// Standard constants by name: H, X, Y, Z, CNOT, CZ.
GateMatrix named_gate(std::string_view name);

// Kronecker product, a's indices more significant than b's.
GateMatrix kron(const GateMatrix& a, const GateMatrix& b);

// max |G^dag G - I| below tol.
bool is_unitary(const GateMatrix& g, double tol = 1e-10);

} // namespace qfcn

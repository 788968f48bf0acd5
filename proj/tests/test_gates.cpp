#include "qfcn/gates.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <numbers>

#include "test_helpers.hpp"

using namespace qfcn;
using test::exp_i_hermitian;
using test::max_abs_diff;
using test::pauli;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd axis_matrix(Axis axis) {
  switch (axis) {
    case Axis::X: return pauli('X');
    case Axis::Y: return pauli('Y');
    default: return pauli('Z');
  }
}

} // namespace

TEST_CASE("rotation matches the matrix exponential", "[gates]") {
  // Closed-form rotations checked against exp(-i theta sigma / 2)
  // computed by eigendecomposition.
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    for (int i = 0; i < 25; ++i) {
      const double theta = test::uniform(-2 * kPi, 2 * kPi);
      const GateMatrix got = rotation(axis, theta);
      const GateMatrix ref = exp_i_hermitian(axis_matrix(axis), -theta / 2);
      REQUIRE(max_abs_diff(got, ref) < 1e-12);
    }
  }
}

TEST_CASE("rotation fixed values", "[gates]") {
  const cplx i(0, 1);

  SECTION("zero angle is the identity") {
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
      REQUIRE(max_abs_diff(rotation(axis, 0.0),
                           Eigen::MatrixXcd::Identity(2, 2)) < 1e-15);
    }
  }
  SECTION("RX(pi) = -i X") {
    REQUIRE(max_abs_diff(rotation(Axis::X, kPi), -i * pauli('X')) < 1e-15);
  }
  SECTION("RY(pi/2) rotates |0> onto (|0>+|1>)/sqrt(2)") {
    Eigen::VectorXcd zero(2);
    zero << 1, 0;
    Eigen::VectorXcd plus(2);
    plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    REQUIRE(max_abs_diff(Eigen::VectorXcd(rotation(Axis::Y, kPi / 2) * zero),
                         plus) < 1e-15);
  }
  SECTION("RZ(theta) is diagonal with phases exp(-+ i theta/2)") {
    const double theta = 0.7;
    const GateMatrix rz = rotation(Axis::Z, theta);
    REQUIRE(std::abs(rz(0, 0) - std::exp(-i * (theta / 2))) < 1e-15);
    REQUIRE(std::abs(rz(1, 1) - std::exp(i * (theta / 2))) < 1e-15);
    REQUIRE(std::abs(rz(0, 1)) == 0.0);
    REQUIRE(std::abs(rz(1, 0)) == 0.0);
  }
}

TEST_CASE("euler_zyz composes RZ RY RZ in the right order", "[gates]") {
  for (int i = 0; i < 20; ++i) {
    const double z1 = test::uniform(-kPi, kPi);
    const double y = test::uniform(-kPi, kPi);
    const double z2 = test::uniform(-kPi, kPi);
    const GateMatrix ref = exp_i_hermitian(pauli('Z'), -z1 / 2) *
                           exp_i_hermitian(pauli('Y'), -y / 2) *
                           exp_i_hermitian(pauli('Z'), -z2 / 2);
    REQUIRE(max_abs_diff(euler_zyz(z1, y, z2), ref) < 1e-12);
  }
  // order check: z2 must act first, so euler_zyz(0, pi/2, pi) differs
  // from euler_zyz(pi, pi/2, 0)
  REQUIRE(max_abs_diff(euler_zyz(0, kPi / 2, kPi),
                       euler_zyz(kPi, kPi / 2, 0)) > 0.1);
}

TEST_CASE("canonical_interaction matches the 4x4 matrix exponential",
          "[gates]") {
  const Eigen::MatrixXcd xx = kron(pauli('X'), pauli('X'));
  const Eigen::MatrixXcd yy = kron(pauli('Y'), pauli('Y'));
  const Eigen::MatrixXcd zz = kron(pauli('Z'), pauli('Z'));
  for (int i = 0; i < 25; ++i) {
    const double ax = test::uniform(-kPi, kPi);
    const double ay = test::uniform(-kPi, kPi);
    const double az = test::uniform(-kPi, kPi);
    const Eigen::MatrixXcd h = ax * xx + ay * yy + az * zz;
    REQUIRE(max_abs_diff(canonical_interaction(ax, ay, az),
                         exp_i_hermitian(h, 1.0)) < 1e-12);
  }
}

TEST_CASE("canonical_interaction fixed values", "[gates]") {
  SECTION("all-zero strengths give the identity") {
    REQUIRE(max_abs_diff(canonical_interaction(0, 0, 0),
                         Eigen::MatrixXcd::Identity(4, 4)) < 1e-15);
  }
  SECTION("single-axis term is cos I + i sin P(x)P") {
    const double a = 0.3;
    const Eigen::MatrixXcd ref =
        std::cos(a) * Eigen::MatrixXcd::Identity(4, 4) +
        cplx(0, 1) * std::sin(a) * kron(pauli('X'), pauli('X'));
    REQUIRE(max_abs_diff(canonical_interaction(a, 0, 0), ref) < 1e-15);
  }
}

TEST_CASE("su4 structure and special cases", "[gates]") {
  SECTION("all-zero parameters give the identity") {
    REQUIRE(max_abs_diff(su4(Su4Params{}),
                         Eigen::MatrixXcd::Identity(4, 4)) < 1e-14);
  }
  SECTION("matches post * core * pre assembled by hand") {
    for (int i = 0; i < 20; ++i) {
      const std::vector<double> flat = test::random_angles(15);
      const Su4Params p = Su4Params::from_flat(flat);
      const GateMatrix pre =
          kron(euler_zyz(p.pre_a[0], p.pre_a[1], p.pre_a[2]),
               euler_zyz(p.pre_b[0], p.pre_b[1], p.pre_b[2]));
      const GateMatrix core = canonical_interaction(
          p.canonical[0], p.canonical[1], p.canonical[2]);
      const GateMatrix post =
          kron(euler_zyz(p.post_a[0], p.post_a[1], p.post_a[2]),
               euler_zyz(p.post_b[0], p.post_b[1], p.post_b[2]));
      REQUIRE(max_abs_diff(su4(p), post * core * pre) < 1e-12);
      REQUIRE(max_abs_diff(su4(std::span<const double>(flat)),
                           post * core * pre) < 1e-12);
    }
  }
  SECTION("flat round-trip preserves the layout") {
    std::vector<double> flat(15);
    for (int i = 0; i < 15; ++i) flat[i] = i + 1;
    const Su4Params p = Su4Params::from_flat(flat);
    REQUIRE(p.pre_a[0] == 1.0);
    REQUIRE(p.pre_b[0] == 4.0);
    REQUIRE(p.canonical[0] == 7.0);
    REQUIRE(p.post_a[0] == 10.0);
    REQUIRE(p.post_b[2] == 15.0);
    const std::array<double, 15> back = p.flat();
    for (int i = 0; i < 15; ++i) REQUIRE(back[i] == flat[i]);
  }
  SECTION("random parameters always give a unitary") {
    for (int i = 0; i < 50; ++i) {
      REQUIRE(is_unitary(su4(std::span<const double>(test::random_angles(15))),
                         1e-10));
    }
  }
  SECTION("wrong flat length is rejected") {
    const std::vector<double> bad(14, 0.0);
    REQUIRE_THROWS_AS(Su4Params::from_flat(bad), std::invalid_argument);
  }
}

TEST_CASE("controlled builds the block-diagonal gate", "[gates]") {
  SECTION("controlled X is CNOT") {
    REQUIRE(max_abs_diff(controlled(named_gate("X")), named_gate("CNOT")) ==
            0.0);
  }
  SECTION("upper-left block is the identity, lower-right is u") {
    const GateMatrix u = test::random_unitary(4);
    const GateMatrix cu = controlled(u);
    REQUIRE(cu.rows() == 8);
    REQUIRE(max_abs_diff(Eigen::MatrixXcd(cu.topLeftCorner(4, 4)),
                         Eigen::MatrixXcd::Identity(4, 4)) == 0.0);
    REQUIRE(max_abs_diff(Eigen::MatrixXcd(cu.bottomRightCorner(4, 4)), u) ==
            0.0);
    REQUIRE(cu.topRightCorner(4, 4).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(cu.bottomLeftCorner(4, 4).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("non-unitary input is rejected") {
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
    bad(0, 0) = 2.0;
    REQUIRE_THROWS_AS(controlled(bad), std::invalid_argument);
  }
}

TEST_CASE("named gates match their textbook matrices", "[gates]") {
  const double s = 1 / std::sqrt(2.0);
  Eigen::MatrixXcd h(2, 2);
  h << s, s, s, -s;
  REQUIRE(max_abs_diff(named_gate("H"), h) < 1e-15);
  REQUIRE(max_abs_diff(named_gate("X"), pauli('X')) == 0.0);
  REQUIRE(max_abs_diff(named_gate("Y"), pauli('Y')) == 0.0);
  REQUIRE(max_abs_diff(named_gate("Z"), pauli('Z')) == 0.0);

  Eigen::MatrixXcd cnot = Eigen::MatrixXcd::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
  REQUIRE(max_abs_diff(named_gate("CNOT"), cnot) == 0.0);

  Eigen::MatrixXcd cz = Eigen::MatrixXcd::Identity(4, 4);
  cz(3, 3) = -1;
  REQUIRE(max_abs_diff(named_gate("CZ"), cz) == 0.0);

  REQUIRE_THROWS_AS(named_gate("SWAP"), std::invalid_argument);
}

TEST_CASE("kron puts the first factor in the high bits", "[gates]") {
  // Z (x) I is diag(1,1,-1,-1): the Z acts on the more significant qubit.
  const GateMatrix zi = kron(pauli('Z'), pauli('I'));
  REQUIRE(zi(0, 0) == cplx(1, 0));
  REQUIRE(zi(1, 1) == cplx(1, 0));
  REQUIRE(zi(2, 2) == cplx(-1, 0));
  REQUIRE(zi(3, 3) == cplx(-1, 0));

  for (int i = 0; i < 5; ++i) {
    const GateMatrix a = test::random_unitary(2);
    const GateMatrix b = test::random_unitary(4);
    const GateMatrix k = kron(a, b);
    REQUIRE(k.rows() == 8);
    // spot-check the block structure k[(i,j) block] = a(i,j) * b
    REQUIRE(max_abs_diff(Eigen::MatrixXcd(k.block(4, 0, 4, 4)),
                         Eigen::MatrixXcd(a(1, 0) * b)) < 1e-15);
  }
}

TEST_CASE("is_unitary separates unitaries from non-unitaries", "[gates]") {
  for (int dim : {2, 4, 8}) {
    REQUIRE(is_unitary(test::random_unitary(dim)));
  }
  Eigen::MatrixXcd nearly = Eigen::MatrixXcd::Identity(2, 2);
  nearly(0, 0) = 1.0 + 1e-6;
  REQUIRE_FALSE(is_unitary(nearly));
  REQUIRE(is_unitary(nearly, 1e-2));
}

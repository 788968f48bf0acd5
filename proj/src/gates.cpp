#include "qfcn/gates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfcn {

namespace {

const cplx kI{0.0, 1.0};

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite angle");
    }
  }
}

void require_finite(std::initializer_list<double> values, const char* what) {
  require_finite(std::span<const double>(values.begin(), values.size()), what);
}

GateMatrix pauli(Axis axis) {
  GateMatrix m(2, 2);
  switch (axis) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, -kI, kI, 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

} // namespace

GateMatrix rotation(Axis axis, double theta) {
  require_finite({theta}, "rotation");
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  GateMatrix m(2, 2);
  switch (axis) {
    case Axis::X:
      m << cplx(c, 0), cplx(0, -s), cplx(0, -s), cplx(c, 0);
      break;
    case Axis::Y:
      m << cplx(c, 0), cplx(-s, 0), cplx(s, 0), cplx(c, 0);
      break;
    case Axis::Z:
      m << std::exp(-kI * (theta / 2.0)), cplx(0, 0), cplx(0, 0),
          std::exp(kI * (theta / 2.0));
      break;
  }
  return m;
}

GateMatrix euler_zyz(double z1, double y, double z2) {
  return rotation(Axis::Z, z1) * rotation(Axis::Y, y) * rotation(Axis::Z, z2);
}

GateMatrix canonical_interaction(double ax, double ay, double az) {
  require_finite({ax, ay, az}, "canonical_interaction");
  GateMatrix result = GateMatrix::Identity(4, 4);
  const std::array<Axis, 3> axes{Axis::X, Axis::Y, Axis::Z};
  const std::array<double, 3> angles{ax, ay, az};
  for (int k = 0; k < 3; ++k) {
    const GateMatrix pp = kron(pauli(axes[k]), pauli(axes[k]));
    // (P(x)P)^2 = I, so exp(i a P(x)P) = cos(a) I + i sin(a) P(x)P.
    result = (std::cos(angles[k]) * GateMatrix::Identity(4, 4) +
              kI * std::sin(angles[k]) * pp) *
             result;
  }
  return result;
}

Su4Params Su4Params::from_flat(std::span<const double> values) {
  if (values.size() != 15) {
    throw std::invalid_argument("Su4Params: expected 15 values, got " +
                                std::to_string(values.size()));
  }
  Su4Params p;
  auto copy3 = [&](std::array<double, 3>& dst, std::size_t off) {
    for (int i = 0; i < 3; ++i) dst[i] = values[off + i];
  };
  copy3(p.pre_a, 0);
  copy3(p.pre_b, 3);
  copy3(p.canonical, 6);
  copy3(p.post_a, 9);
  copy3(p.post_b, 12);
  return p;
}

std::array<double, 15> Su4Params::flat() const {
  std::array<double, 15> out;
  auto put3 = [&](const std::array<double, 3>& src, std::size_t off) {
    for (int i = 0; i < 3; ++i) out[off + i] = src[i];
  };
  put3(pre_a, 0);
  put3(pre_b, 3);
  put3(canonical, 6);
  put3(post_a, 9);
  put3(post_b, 12);
  return out;
}

GateMatrix su4(const Su4Params& p) {
  require_finite(p.flat(), "su4");
  const GateMatrix pre =
      kron(euler_zyz(p.pre_a[0], p.pre_a[1], p.pre_a[2]),
           euler_zyz(p.pre_b[0], p.pre_b[1], p.pre_b[2]));
  const GateMatrix post =
      kron(euler_zyz(p.post_a[0], p.post_a[1], p.post_a[2]),
           euler_zyz(p.post_b[0], p.post_b[1], p.post_b[2]));
  const GateMatrix core =
      canonical_interaction(p.canonical[0], p.canonical[1], p.canonical[2]);
  return post * core * pre;
}

GateMatrix su4(std::span<const double> flat15) {
  return su4(Su4Params::from_flat(flat15));
}

GateMatrix controlled(const GateMatrix& u) {
  if (u.rows() != u.cols() || u.rows() == 0) {
    throw std::invalid_argument("controlled: gate must be square");
  }
  if (!is_unitary(u, 1e-8)) {
    throw std::invalid_argument("controlled: gate is not unitary");
  }
  const Eigen::Index d = u.rows();
  GateMatrix m = GateMatrix::Zero(2 * d, 2 * d);
  m.topLeftCorner(d, d) = GateMatrix::Identity(d, d);
  m.bottomRightCorner(d, d) = u;
  return m;
}

GateMatrix named_gate(std::string_view name) {
  GateMatrix m;
  if (name == "H") {
    const double s = 1.0 / std::sqrt(2.0);
    m.resize(2, 2);
    m << s, s, s, -s;
  } else if (name == "X") {
    m = pauli(Axis::X);
  } else if (name == "Y") {
    m = pauli(Axis::Y);
  } else if (name == "Z") {
    m = pauli(Axis::Z);
  } else if (name == "CNOT") {
    m = controlled(pauli(Axis::X));
  } else if (name == "CZ") {
    m.resize(4, 4);
    m.setZero();
    m.diagonal() << 1, 1, 1, -1;
  } else {
    throw std::invalid_argument("named_gate: unknown gate \"" +
                                std::string(name) + "\"");
  }
  return m;
}

GateMatrix kron(const GateMatrix& a, const GateMatrix& b) {
  GateMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool is_unitary(const GateMatrix& g, double tol) {
  if (g.rows() != g.cols()) return false;
  const GateMatrix delta =
      g.adjoint() * g - GateMatrix::Identity(g.rows(), g.cols());
  return delta.cwiseAbs().maxCoeff() < tol;
}

} // namespace qfcn

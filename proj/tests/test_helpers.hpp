#pragma once

// Shared helpers for the unit tests: deterministic randomness plus
// independent dense-matrix oracles that the library implementations are
// checked against. Everything here is written from the index convention
// directly (qubit 0 = most significant bit) without calling into the
// kernels under test.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace test {

using cplx = std::complex<double>;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240817u);
  return engine;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng());
}

inline std::vector<double> random_angles(int n, double lo = -3.14159265,
                                         double hi = 3.14159265) {
  std::vector<double> out(n);
  for (double& v : out) v = uniform(lo, hi);
  return out;
}

inline Eigen::MatrixXcd pauli(char which) {
  Eigen::MatrixXcd m(2, 2);
  switch (which) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break; // Z
  }
  return m;
}

// exp(i s H) for Hermitian H, via eigendecomposition. This is the
// reference exponential the closed-form gate constructors are tested
// against.
inline Eigen::MatrixXcd exp_i_hermitian(const Eigen::MatrixXcd& h, double s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd phases(h.rows());
  for (int k = 0; k < h.rows(); ++k) {
    phases(k) = std::exp(cplx(0.0, s * es.eigenvalues()(k)));
  }
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

// Haar-ish random unitary: QR of a Ginibre matrix with the R diagonal
// phases folded back in.
inline Eigen::MatrixXcd random_unitary(int dim) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng()), g(rng()));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

inline Eigen::VectorXcd random_state(int n_qubits) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(1 << n_qubits);
  for (int i = 0; i < v.size(); ++i) v(i) = cplx(g(rng()), g(rng()));
  return v / v.norm();
}

inline Eigen::MatrixXcd random_density(int n_qubits) {
  std::normal_distribution<double> g;
  const int dim = 1 << n_qubits;
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng()), g(rng()));
  }
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline double max_abs_diff(const Eigen::MatrixXcd& a,
                           const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const Eigen::VectorXcd& a,
                           const Eigen::VectorXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Dense embedding oracle: the full 2^n x 2^n operator that applies
// `gate` to `targets` (targets[0] = the gate's most significant bit)
// and the identity elsewhere.
inline Eigen::MatrixXcd embed(const Eigen::MatrixXcd& gate, int n,
                              const std::vector<int>& targets) {
  const int dim = 1 << n;
  const int k = static_cast<int>(targets.size());
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    int gcol = 0;
    for (int t = 0; t < k; ++t) {
      gcol = (gcol << 1) | ((col >> (n - 1 - targets[t])) & 1);
    }
    for (int grow = 0; grow < (1 << k); ++grow) {
      int row = col;
      for (int t = 0; t < k; ++t) {
        const int mask = 1 << (n - 1 - targets[t]);
        row = (grow >> (k - 1 - t)) & 1 ? row | mask : row & ~mask;
      }
      full(row, col) += gate(grow, gcol);
    }
  }
  return full;
}

// Brute-force partial trace by index summation over the traced bits.
inline Eigen::MatrixXcd trace_out(const Eigen::MatrixXcd& rho, int n,
                                  const std::vector<int>& traced) {
  std::vector<int> kept;
  for (int q = 0; q < n; ++q) {
    bool is_traced = false;
    for (int t : traced) is_traced |= t == q;
    if (!is_traced) kept.push_back(q);
  }
  const auto scatter = [&](int bits, const std::vector<int>& qs) {
    int full = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      if ((bits >> (qs.size() - 1 - i)) & 1) full |= 1 << (n - 1 - qs[i]);
    }
    return full;
  };
  const int dim_kept = 1 << kept.size();
  const int dim_traced = 1 << traced.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_kept, dim_kept);
  for (int j = 0; j < dim_kept; ++j) {
    for (int l = 0; l < dim_kept; ++l) {
      for (int m = 0; m < dim_traced; ++m) {
        out(j, l) += rho(scatter(j, kept) | scatter(m, traced),
                         scatter(l, kept) | scatter(m, traced));
      }
    }
  }
  return out;
}

} // namespace test

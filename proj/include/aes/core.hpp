#pragma once

// Shared value types for bipartite state computations.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace aes {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Raised for malformed arguments: dimension mismatches, out-of-range
// parameters, broken invariants of input values.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Split of C^d into C^d1 (x) C^d2. Flat index of |i1 i2> is i1 * d2 + i2.
struct Bipartition {
  int d1 = 2;
  int d2 = 2;

  Bipartition() = default;
  Bipartition(int first, int second) : d1(first), d2(second) {
    if (d1 < 2 || d2 < 2) {
      throw invalid_input("bipartition dimensions must be >= 2, got (" +
                          std::to_string(d1) + "," + std::to_string(d2) + ")");
    }
  }

  int dim() const { return d1 * d2; }
  int larger() const { return d1 > d2 ? d1 : d2; }
  int flat(int i1, int i2) const { return i1 * d2 + i2; }

  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

inline void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw invalid_input(std::string(what) + ": matrix must be square and non-empty");
  }
}

inline void require_dim(Eigen::Index dim, const Bipartition& bp, const char* what) {
  if (dim != bp.dim()) {
    throw invalid_input(std::string(what) + ": dimension " + std::to_string(dim) +
                        " does not match bipartition " + std::to_string(bp.d1) + "x" +
                        std::to_string(bp.d2));
  }
}

inline double hermitian_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Eigenvalues (ascending) of the Hermitian part of m.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Unit vector in C^d. Squared norm is within 1e-12 of one.
class PureState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  explicit PureState(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) throw invalid_input("pure state must be non-empty");
    if (!amps_.allFinite()) throw invalid_input("pure state has non-finite amplitudes");
    const double n2 = amps_.squaredNorm();
    if (std::abs(n2 - 1.0) > kNormTolerance) {
      throw invalid_input("pure state is not normalized (squared norm " + std::to_string(n2) + ")");
    }
  }

  // Rescales any non-zero vector to unit norm.
  static PureState normalized(const ComplexVector& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw invalid_input("cannot normalize a zero vector");
    return PureState(v / n);
  }

  static PureState basis(int dim, int index) {
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return PureState(std::move(v));
  }

  Eigen::Index dim() const { return amps_.size(); }
  const ComplexVector& amplitudes() const { return amps_; }
  complex operator[](Eigen::Index i) const { return amps_(i); }

  ComplexMatrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  ComplexVector amps_;
};

// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kTraceTolerance = 1e-12;
  static constexpr double kEigenTolerance = 1e-10;

  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "density matrix");
    if (!m_.allFinite()) throw invalid_input("density matrix has non-finite entries");
    if (hermitian_defect(m_) > kHermitianTolerance) {
      throw invalid_input("density matrix is not Hermitian");
    }
    const complex tr = m_.trace();
    if (std::abs(tr - 1.0) > kTraceTolerance) {
      throw invalid_input("density matrix trace is " + std::to_string(tr.real()) + ", expected 1");
    }
    if (hermitian_eigenvalues(m_)(0) < -kEigenTolerance) {
      throw invalid_input("density matrix has a negative eigenvalue");
    }
  }

  explicit DensityMatrix(const PureState& psi) : m_(psi.projector()) {}

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }

 private:
  ComplexMatrix m_;
};

}  // namespace aes

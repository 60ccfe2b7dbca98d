#pragma once

// Test-only helpers: seeded random states and Haar-ish unitaries built via QR,
// independent of the library's exponential parametrization.

#include "aes/core.hpp"

#include <random>

namespace aes::testing {

inline ComplexVector random_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = complex(g(rng), g(rng));
  return v;
}

inline PureState random_pure(std::mt19937_64& rng, int dim) {
  return PureState::normalized(random_vector(rng, dim));
}

inline PureState random_product(std::mt19937_64& rng, const Bipartition& bp) {
  const ComplexVector a = random_vector(rng, bp.d1);
  const ComplexVector b = random_vector(rng, bp.d2);
  ComplexVector v(bp.dim());
  for (int i = 0; i < bp.d1; ++i)
    for (int j = 0; j < bp.d2; ++j) v(bp.flat(i, j)) = a(i) * b(j);
  return PureState::normalized(v);
}

inline ComplexMatrix random_unitary(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = complex(g(rng), g(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

inline ComplexMatrix random_density(std::mt19937_64& rng, int dim) {
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) g.col(i) = random_vector(rng, dim);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, int dim) {
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) g.col(i) = random_vector(rng, dim);
  return 0.5 * (g + g.adjoint());
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double unitarity_defect(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace aes::testing

#pragma once

// Dense bipartite state primitives: partial transpose and trace, negativity,
// entropy of entanglement, and a product-state residual for pure states.

#include "aes/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aes {

enum class Subsystem { first, second };

// Entry ((i1,i2),(j1,j2)) of the result is entry ((j1,i2),(i1,j2)) of rho.
inline ComplexMatrix partial_transpose(const ComplexMatrix& rho, const Bipartition& bp) {
  require_square(rho, "partial_transpose");
  require_dim(rho.rows(), bp, "partial_transpose");
  const int d2 = bp.d2;
  ComplexMatrix out(rho.rows(), rho.cols());
  for (int i1 = 0; i1 < bp.d1; ++i1)
    for (int i2 = 0; i2 < d2; ++i2)
      for (int j1 = 0; j1 < bp.d1; ++j1)
        for (int j2 = 0; j2 < d2; ++j2)
          out(i1 * d2 + i2, j1 * d2 + j2) = rho(j1 * d2 + i2, i1 * d2 + j2);
  return out;
}

namespace detail {

inline double negativity_unchecked(const ComplexMatrix& rho, const Bipartition& bp) {
  const RealVector ev = hermitian_eigenvalues(partial_transpose(rho, bp));
  double n = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) < 0.0) n -= ev(i);
  return n;
}

inline ComplexMatrix amplitude_grid(const ComplexVector& psi, const Bipartition& bp) {
  ComplexMatrix a(bp.d1, bp.d2);
  for (int i1 = 0; i1 < bp.d1; ++i1)
    for (int i2 = 0; i2 < bp.d2; ++i2) a(i1, i2) = psi(bp.flat(i1, i2));
  return a;
}

inline RealVector schmidt_coefficients(const ComplexVector& psi, const Bipartition& bp) {
  require_dim(psi.size(), bp, "schmidt_coefficients");
  Eigen::JacobiSVD<ComplexMatrix> svd(amplitude_grid(psi, bp));
  return svd.singularValues();
}

// For a pure state N = ((sum of Schmidt coefficients)^2 - 1) / 2.
inline double pure_negativity(const ComplexVector& psi, const Bipartition& bp) {
  const RealVector s = schmidt_coefficients(psi, bp);
  const double sum = s.sum();
  return std::max(0.0, 0.5 * (sum * sum - s.squaredNorm()));
}

inline double shannon_bits(const RealVector& probabilities) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities(i);
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

inline double pure_entropy(const ComplexVector& psi, const Bipartition& bp) {
  const RealVector s = schmidt_coefficients(psi, bp);
  return shannon_bits(s.array().square().matrix());
}

}  // namespace detail

// Sum of |negative eigenvalues| of the partial transpose.
inline double negativity(const ComplexMatrix& rho, const Bipartition& bp) {
  require_square(rho, "negativity");
  require_dim(rho.rows(), bp, "negativity");
  const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
  if (hermitian_defect(rho) > 1e-10 * scale) {
    throw invalid_input("negativity: input is not Hermitian");
  }
  return detail::negativity_unchecked(rho, bp);
}

inline double negativity(const DensityMatrix& rho, const Bipartition& bp) {
  return negativity(rho.matrix(), bp);
}

inline double negativity(const PureState& psi, const Bipartition& bp) {
  return negativity(psi.projector(), bp);
}

// Reduced state on the kept subsystem.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const Bipartition& bp, Subsystem keep) {
  require_square(rho, "partial_trace");
  require_dim(rho.rows(), bp, "partial_trace");
  if (keep == Subsystem::first) {
    ComplexMatrix out = ComplexMatrix::Zero(bp.d1, bp.d1);
    for (int i1 = 0; i1 < bp.d1; ++i1)
      for (int j1 = 0; j1 < bp.d1; ++j1)
        for (int k = 0; k < bp.d2; ++k) out(i1, j1) += rho(bp.flat(i1, k), bp.flat(j1, k));
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(bp.d2, bp.d2);
  for (int i2 = 0; i2 < bp.d2; ++i2)
    for (int j2 = 0; j2 < bp.d2; ++j2)
      for (int k = 0; k < bp.d1; ++k) out(i2, j2) += rho(bp.flat(k, i2), bp.flat(k, j2));
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const Bipartition& bp, Subsystem keep) {
  return DensityMatrix(partial_trace(rho.matrix(), bp, keep));
}

inline RealVector schmidt_coefficients(const PureState& psi, const Bipartition& bp) {
  return detail::schmidt_coefficients(psi.amplitudes(), bp);
}

// Base-2 entropy of the reduced state, with 0 log 0 = 0.
inline double entropy_of_entanglement(const PureState& psi, const Bipartition& bp) {
  require_dim(psi.dim(), bp, "entropy_of_entanglement");
  return detail::pure_entropy(psi.amplitudes(), bp);
}

inline double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw invalid_input("binary_entropy: p outside [0,1]");
  RealVector probs(2);
  probs << p, 1.0 - p;
  return detail::shannon_bits(probs);
}

// Entropy of a Schmidt-rank-2 pure state with negativity n:
// h((1 + sqrt(1 - 4 n^2)) / 2). Defined on [0, 1/2].
inline double entropy_from_negativity(double n) {
  if (!(n >= 0.0 && n <= 0.5)) throw invalid_input("entropy_from_negativity: negativity must lie in [0, 1/2]");
  return binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - 4.0 * n * n))));
}

// Largest 2x2-minor violation |a_00 a_nj - a_n0 a_0j| after local basis
// permutations move a largest-modulus amplitude to |00>. Zero exactly on
// product states.
inline double product_residual(const ComplexVector& psi, const Bipartition& bp) {
  require_dim(psi.size(), bp, "product_residual");
  ComplexMatrix a = detail::amplitude_grid(psi, bp);
  Eigen::Index r = 0, c = 0;
  a.cwiseAbs().maxCoeff(&r, &c);
  a.row(0).swap(a.row(r));
  a.col(0).swap(a.col(c));
  double worst = 0.0;
  for (int n = 1; n < bp.d1; ++n)
    for (int j = 1; j < bp.d2; ++j)
      worst = std::max(worst, std::abs(a(0, 0) * a(n, j) - a(n, 0) * a(0, j)));
  return worst;
}

inline double product_residual(const PureState& psi, const Bipartition& bp) {
  return product_residual(psi.amplitudes(), bp);
}

}  // namespace aes

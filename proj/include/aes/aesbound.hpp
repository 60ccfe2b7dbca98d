#pragma once

// Moment relaxation of the absolute set negativity
//   min_U sum_k N(U rho_k U^dagger)
// written with the variational negativity: U rho_k U^dagger = s+ - s-,
// both parts PPT, minimize sum_k Tr s-. Real variables are the real and
// imaginary parts of the entries of U and of the Hermitian parts s+-.

#include "aes/polyopt.hpp"
#include "aes/qstate.hpp"
#include "aes/sdp.hpp"
#include "aes/sets.hpp"

#include <algorithm>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace aes {

struct RelaxationConfig {
  int moment_deg_u = 2;    // moment block over the U variables
  int moment_deg_xi = 2;   // one moment block per (state, sign) over its s variables
  int loc_deg_u = 1;       // U-basis degree of the PPT localizers and of the U rho U^dagger equalities
  int eq_deg = 1;          // degree of the {u} and {xi_k,s} bases localizing U U^dagger = I
  bool include_left_unitarity = false;
  // Adds s+- >= 0 at basis {1}. Off by default: the optimal split of an
  // entangled state can have a non-positive part, so this cuts off feasible
  // points and the result is no longer a lower bound.
  bool include_sigma_psd = false;

  static RelaxationConfig full() { return {}; }
  static RelaxationConfig fast() {
    RelaxationConfig c;
    c.moment_deg_u = 1;
    c.moment_deg_xi = 1;
    c.loc_deg_u = 0;
    c.eq_deg = 1;
    return c;
  }

  void validate() const {
    if (moment_deg_u < 0 || moment_deg_xi < 0 || loc_deg_u < 0 || eq_deg < 0) {
      throw invalid_input("relaxation config: degrees must be >= 0");
    }
    if (eq_deg < 1) throw invalid_input("relaxation config: unitarity equalities need eq_deg >= 1");
  }
};

enum class Sign { plus = 0, minus = 1 };

// Slot map. u_ij: Re at 2(i d + j), Im right after. The part s of state k
// starts at 2 d^2 + (2k + s) d^2 with the d diagonal entries followed by
// Re/Im of the strictly upper entries in row-major order.
struct VariableLayout {
  int d = 0;
  int K = 0;

  VariableLayout(int dim, int states) : d(dim), K(states) {
    if (d < 1 || K < 1) throw invalid_input("variable layout: need d >= 1 and K >= 1");
  }

  int u_count() const { return 2 * d * d; }
  int total() const { return u_count() + 2 * K * d * d; }
  int u_re(int i, int j) const { return 2 * (i * d + j); }
  int u_im(int i, int j) const { return u_re(i, j) + 1; }
  int xi_base(int k, Sign s) const { return u_count() + (2 * k + static_cast<int>(s)) * d * d; }
  int xi_diag(int k, Sign s, int i) const { return xi_base(k, s) + i; }
  int pair_index(int i, int j) const { return i * d - i * (i + 1) / 2 + (j - i - 1); }
  int xi_re(int k, Sign s, int i, int j) const { return xi_base(k, s) + d + 2 * pair_index(i, j); }
  int xi_im(int k, Sign s, int i, int j) const { return xi_re(k, s, i, j) + 1; }

  std::string name(int v) const {
    if (v < 0 || v >= total()) throw invalid_input("variable layout: slot out of range");
    if (v < u_count()) {
      const int e = v / 2;
      return std::string(v % 2 == 0 ? "Re" : "Im") + " u[" + std::to_string(e / d) + "][" + std::to_string(e % d) +
             "]";
    }
    const int block = (v - u_count()) / (d * d);
    const int off = (v - u_count()) % (d * d);
    const std::string part = "s" + std::string(block % 2 == 0 ? "+" : "-") + "_" + std::to_string(block / 2);
    if (off < d) return part + "[" + std::to_string(off) + "][" + std::to_string(off) + "]";
    const int p = (off - d) / 2;
    int i = 0;
    while (pair_index(i, d - 1) < p) ++i;
    const int j = p - pair_index(i, i + 1) + i + 1;
    return std::string(off % 2 == 0 ? "Re " : "Im ") + part + "[" + std::to_string(i) + "][" + std::to_string(j) +
           "]";
  }

  // Point of the polynomial program for a given U and parts s+-_k.
  RealVector point(const ComplexMatrix& u, const std::vector<std::pair<ComplexMatrix, ComplexMatrix>>& parts) const {
    if (u.rows() != d || u.cols() != d || static_cast<int>(parts.size()) != K) {
      throw invalid_input("variable layout: point has the wrong shape");
    }
    RealVector x = RealVector::Zero(total());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        x(u_re(i, j)) = u(i, j).real();
        x(u_im(i, j)) = u(i, j).imag();
      }
    for (int k = 0; k < K; ++k)
      for (const Sign s : {Sign::plus, Sign::minus}) {
        const ComplexMatrix& m = s == Sign::plus ? parts[static_cast<std::size_t>(k)].first
                                                 : parts[static_cast<std::size_t>(k)].second;
        for (int i = 0; i < d; ++i) {
          x(xi_diag(k, s, i)) = m(i, i).real();
          for (int j = i + 1; j < d; ++j) {
            x(xi_re(k, s, i, j)) = m(i, j).real();
            x(xi_im(k, s, i, j)) = m(i, j).imag();
          }
        }
      }
    return x;
  }
};

namespace detail {

struct CPoly {
  Polynomial re, im;
};

inline CPoly operator+(const CPoly& a, const CPoly& b) { return {a.re + b.re, a.im + b.im}; }
inline CPoly operator-(const CPoly& a, const CPoly& b) { return {a.re - b.re, a.im - b.im}; }
inline CPoly operator*(const CPoly& a, const CPoly& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline CPoly operator*(std::complex<double> z, const CPoly& a) {
  return {z.real() * a.re - z.imag() * a.im, z.real() * a.im + z.imag() * a.re};
}
inline CPoly conj(const CPoly& a) { return {a.re, (-1.0) * a.im}; }

using CPolyMatrix = std::vector<std::vector<CPoly>>;

inline CPolyMatrix cpoly_matrix(int d) { return CPolyMatrix(static_cast<std::size_t>(d), std::vector<CPoly>(d)); }

inline CPolyMatrix unitary_symbols(const VariableLayout& lay) {
  CPolyMatrix u = cpoly_matrix(lay.d);
  for (int i = 0; i < lay.d; ++i)
    for (int j = 0; j < lay.d; ++j) u[i][j] = {Polynomial::variable(lay.u_re(i, j)), Polynomial::variable(lay.u_im(i, j))};
  return u;
}

inline CPolyMatrix part_symbols(const VariableLayout& lay, int k, Sign s) {
  CPolyMatrix m = cpoly_matrix(lay.d);
  for (int i = 0; i < lay.d; ++i) {
    m[i][i] = {Polynomial::variable(lay.xi_diag(k, s, i)), Polynomial()};
    for (int j = i + 1; j < lay.d; ++j) {
      m[i][j] = {Polynomial::variable(lay.xi_re(k, s, i, j)), Polynomial::variable(lay.xi_im(k, s, i, j))};
      m[j][i] = conj(m[i][j]);
    }
  }
  return m;
}

inline CPolyMatrix constant_matrix(const ComplexMatrix& a) {
  CPolyMatrix m = cpoly_matrix(static_cast<int>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) m[i][j] = {Polynomial(a(i, j).real()), Polynomial(a(i, j).imag())};
  return m;
}

inline CPolyMatrix partial_transpose(const CPolyMatrix& m, const Bipartition& bp) {
  CPolyMatrix out = cpoly_matrix(static_cast<int>(m.size()));
  for (int i1 = 0; i1 < bp.d1; ++i1)
    for (int i2 = 0; i2 < bp.d2; ++i2)
      for (int j1 = 0; j1 < bp.d1; ++j1)
        for (int j2 = 0; j2 < bp.d2; ++j2)
          out[i1 * bp.d2 + i2][j1 * bp.d2 + j2] = m[j1 * bp.d2 + i2][i1 * bp.d2 + j2];
  return out;
}

// [[Re, -Im], [Im, Re]]: PSD exactly when the Hermitian matrix is.
inline PolyMatrix real_embedding(const CPolyMatrix& h) {
  const int d = static_cast<int>(h.size());
  PolyMatrix r(2 * d, 2 * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      r(i, j) = h[i][j].re;
      r(i + d, j + d) = h[i][j].re;
      r(i, j + d) = (-1.0) * h[i][j].im;
      r(i + d, j) = h[i][j].im;
    }
  return r;
}

// U A U^dagger for a constant A.
inline CPolyMatrix conjugate_by(const CPolyMatrix& u, const ComplexMatrix& a) {
  const int d = static_cast<int>(u.size());
  CPolyMatrix ua = cpoly_matrix(d);
  for (int i = 0; i < d; ++i)
    for (int m = 0; m < d; ++m)
      for (int l = 0; l < d; ++l)
        if (a(l, m) != 0.0) ua[i][m] = ua[i][m] + a(l, m) * u[i][l];
  CPolyMatrix out = cpoly_matrix(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      for (int m = 0; m < d; ++m) out[i][j] = out[i][j] + ua[i][m] * conj(u[j][m]);
      out[j][i] = conj(out[i][j]);
    }
  return out;
}

// U U^dagger - I, or U^dagger U - I when `left` is set.
inline CPolyMatrix unitarity_defect(const CPolyMatrix& u, bool left) {
  const int d = static_cast<int>(u.size());
  CPolyMatrix out = cpoly_matrix(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      for (int m = 0; m < d; ++m)
        out[i][j] = out[i][j] + (left ? conj(u[m][i]) * u[m][j] : u[i][m] * conj(u[j][m]));
      if (i == j) out[i][j].re -= Polynomial(1.0);
      out[j][i] = conj(out[i][j]);
    }
  return out;
}

// Real parts on and above the diagonal, imaginary parts strictly above: the
// independent real components of a Hermitian matrix.
inline std::vector<Polynomial> hermitian_components(const CPolyMatrix& h) {
  std::vector<Polynomial> out;
  const int d = static_cast<int>(h.size());
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      out.push_back(h[i][j].re);
      if (j > i) out.push_back(h[i][j].im);
    }
  return out;
}

inline void add_localized(std::vector<LinearForm>& out, const std::vector<Polynomial>& hs, const MonomialBasis& basis) {
  for (const auto& h : hs)
    for (auto& f : localize_equality(h, basis)) out.push_back(std::move(f));
}

inline std::string part_name(int k, Sign s) {
  return std::to_string(k) + (s == Sign::plus ? "+" : "-");
}

inline LinearForm minus_trace_objective(const VariableLayout& lay) {
  LinearForm obj;
  for (int k = 0; k < lay.K; ++k)
    for (int i = 0; i < lay.d; ++i) obj += Polynomial::variable(lay.xi_diag(k, Sign::minus, i));
  return obj;
}

inline void require_square_states(const StateSet& s) {
  if (s.size() == 0) throw invalid_input("relaxation: state set must be non-empty");
  if (s.dim() != s.bp.d1 * s.bp.d2) throw invalid_input("relaxation: dimension does not match the bipartition");
}

}  // namespace detail

inline SymbolicSDP build_negativity_relaxation(const StateSet& s, const RelaxationConfig& cfg) {
  cfg.validate();
  detail::require_square_states(s);
  const int d = s.dim();
  const auto rhos = s.densities();
  const VariableLayout lay(d, static_cast<int>(rhos.size()));
  const auto u = detail::unitary_symbols(lay);
  const MonomialBasis loc_basis = monomial_basis(lay.u_count(), cfg.loc_deg_u, 0);

  SymbolicSDP sdp;
  sdp.nvars = lay.total();
  sdp.objective = detail::minus_trace_objective(lay);
  sdp.psd_blocks.push_back({"moment u", moment_matrix(monomial_basis(lay.u_count(), cfg.moment_deg_u, 0))});
  std::vector<MonomialBasis> eq_parts{monomial_basis(lay.u_count(), cfg.eq_deg, 0)};
  for (int k = 0; k < lay.K; ++k)
    for (const Sign sg : {Sign::plus, Sign::minus}) {
      const MonomialBasis xb = monomial_basis(d * d, cfg.moment_deg_xi, lay.xi_base(k, sg));
      if (cfg.moment_deg_xi > 0) sdp.psd_blocks.push_back({"moment s" + detail::part_name(k, sg), moment_matrix(xb)});
      eq_parts.push_back(monomial_basis(d * d, cfg.eq_deg, lay.xi_base(k, sg)));
    }
  for (int k = 0; k < lay.K; ++k)
    for (const Sign sg : {Sign::plus, Sign::minus}) {
      const auto part = detail::part_symbols(lay, k, sg);
      sdp.psd_blocks.push_back({"ppt s" + detail::part_name(k, sg),
                                localizing_matrix_psd(detail::real_embedding(detail::partial_transpose(part, s.bp)),
                                                      loc_basis)});
      if (cfg.include_sigma_psd) {
        sdp.psd_blocks.push_back({"psd s" + detail::part_name(k, sg),
                                  localizing_matrix_psd(detail::real_embedding(part), MonomialBasis{Monomial()})});
      }
    }

  for (int k = 0; k < lay.K; ++k) {
    const auto rot = detail::conjugate_by(u, rhos[static_cast<std::size_t>(k)]);
    const auto pos = detail::part_symbols(lay, k, Sign::plus);
    const auto neg = detail::part_symbols(lay, k, Sign::minus);
    auto diff = detail::cpoly_matrix(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) diff[i][j] = rot[i][j] - pos[i][j] + neg[i][j];
    detail::add_localized(sdp.equalities, detail::hermitian_components(diff), loc_basis);
  }
  const MonomialBasis eq_basis = basis_union(eq_parts);
  detail::add_localized(sdp.equalities, detail::hermitian_components(detail::unitarity_defect(u, false)), eq_basis);
  if (cfg.include_left_unitarity) {
    detail::add_localized(sdp.equalities, detail::hermitian_components(detail::unitarity_defect(u, true)), eq_basis);
  }
  sdp.register_moments();
  return sdp;
}

// Same program with U fixed: a plain SDP in the parts whose optimum is
// sum_k N(U rho_k U^dagger) when include_sigma_psd is off.
inline SymbolicSDP build_fixed_unitary_program(const StateSet& s, const ComplexMatrix& unitary,
                                               bool include_sigma_psd = false) {
  detail::require_square_states(s);
  const int d = s.dim();
  if (unitary.rows() != d || unitary.cols() != d) throw invalid_input("fixed unitary program: unitary has wrong size");
  const auto rhos = s.densities();
  const VariableLayout lay(d, static_cast<int>(rhos.size()));
  const MonomialBasis one{Monomial()};
  SymbolicSDP sdp;
  sdp.nvars = lay.total();
  sdp.objective = detail::minus_trace_objective(lay);
  for (int k = 0; k < lay.K; ++k) {
    const auto rot = detail::constant_matrix(unitary * rhos[static_cast<std::size_t>(k)] * unitary.adjoint());
    const auto plus = detail::part_symbols(lay, k, Sign::plus);
    const auto minus = detail::part_symbols(lay, k, Sign::minus);
    auto diff = detail::cpoly_matrix(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) diff[i][j] = rot[i][j] - plus[i][j] + minus[i][j];
    detail::add_localized(sdp.equalities, detail::hermitian_components(diff), one);
    for (const Sign sg : {Sign::plus, Sign::minus}) {
      const auto part = sg == Sign::plus ? plus : minus;
      sdp.psd_blocks.push_back({"ppt s" + detail::part_name(k, sg),
                                detail::real_embedding(detail::partial_transpose(part, s.bp))});
      if (include_sigma_psd) sdp.psd_blocks.push_back({"psd s" + detail::part_name(k, sg), detail::real_embedding(part)});
    }
  }
  sdp.register_moments();
  return sdp;
}

// Exact feasible point for a given U: parts from the eigen-split of the
// partial transpose, P - N = (U rho U^dagger)^{T_A}, s+ = P^{T_A}, s- = N^{T_A}.
inline RealVector feasible_point(const StateSet& s, const ComplexMatrix& unitary) {
  detail::require_square_states(s);
  const auto rhos = s.densities();
  const VariableLayout lay(s.dim(), static_cast<int>(rhos.size()));
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> parts;
  for (const auto& rho : rhos) {
    const ComplexMatrix pt = partial_transpose(ComplexMatrix(unitary * rho * unitary.adjoint()), s.bp);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (pt + pt.adjoint()));
    const RealVector ev = es.eigenvalues();
    const ComplexMatrix& v = es.eigenvectors();
    const ComplexMatrix pos = v * ev.cwiseMax(0.0).cast<std::complex<double>>().asDiagonal() * v.adjoint();
    const ComplexMatrix neg = v * (-ev).cwiseMax(0.0).cast<std::complex<double>>().asDiagonal() * v.adjoint();
    parts.emplace_back(partial_transpose(pos, s.bp), partial_transpose(neg, s.bp));
  }
  return lay.point(unitary, parts);
}

struct BoundResult {
  double bound = 0.0;         // max(dual objective, 0)
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  std::string message;
  int iterations = 0;
  CertificateReport certificate;
  int moment_variables = 0;
  int largest_block = 0;
  int equalities = 0;

  // A lower bound needs a checked dual; a primal alone only bounds from above.
  bool certified() const { return status == SolveStatus::optimal && certificate.pass && certificate.has_dual; }
};

// Reads off a bound from a solution of the lowered relaxation. The dual
// objective is the lower bound; the primal is reported for the gap.
inline BoundResult bound_from_solution(const NumericSDP& p, const SDPSolution& sol, double tol = 1e-8) {
  BoundResult r;
  r.certificate = check_certificate(p, sol, tol);
  r.status = sol.status;
  r.message = sol.message;
  r.iterations = sol.iterations;
  r.dual_objective = r.certificate.dual_objective;
  r.primal_objective = r.certificate.objective;
  r.bound = std::max(r.certificate.has_dual ? r.dual_objective : r.primal_objective, 0.0);
  r.moment_variables = p.nvars;
  r.largest_block = p.largest_block();
  r.equalities = static_cast<int>(p.equalities.size());
  return r;
}

// Internal solve. Throws budget_exceeded for programs beyond the solver
// limits; export those with the SDPA writer instead.
inline BoundResult lower_bound_negativity(const StateSet& s, const RelaxationConfig& cfg,
                                          const SolveOptions& opts = {}) {
  const NumericSDP p = presolve_free_rows(lower_numeric(build_negativity_relaxation(s, cfg))).problem;
  const SDPSolution sol = solve(p, opts);
  return bound_from_solution(p, sol, opts.tol);
}

// K f(N / K) with f the entropy of a two-level Schmidt state of negativity N.
inline double entropy_lower_bound(double n_lower, int k) {
  if (k < 1) throw invalid_input("entropy_lower_bound: K must be >= 1");
  if (!(n_lower >= 0.0)) throw invalid_input("entropy_lower_bound: negativity bound must be >= 0");
  if (n_lower / k > 0.5) throw invalid_input("entropy_lower_bound: N/K exceeds the maximal negativity 1/2");
  return k * entropy_from_negativity(n_lower / k);
}

}  // namespace aes

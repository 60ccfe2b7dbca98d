#pragma once

// Numeric semidefinite programs in linear-matrix-inequality form
//
//   minimize    c^T y + offset
//   subject to  F_0^b + sum_i y_i F_i^b  PSD  for every block b,
//               A y = b,
//
// with a primal-dual interior-point solver and an independent certificate
// checker. The solver eliminates the equalities by sparse substitution and
// then runs an infeasible-start HKM method with Mehrotra correction on the
// reduced problem. Its dual
//
//   maximize    offset - sum_b <F_0^b, X^b>   s.t.  <F_i, X> = c_i,  X PSD
//
// gives the reported dual_value, a lower bound on the optimum.

#include "aes/core.hpp"
#include "aes/polyopt.hpp"

#include <Eigen/SparseCore>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseQR>
#include <Eigen/OrderingMethods>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aes {

// Coefficient of variable `var` (or of F_0 when var = -1) at (i, j), i <= j.
struct BlockEntry {
  int var = -1;
  int i = 0;
  int j = 0;
  double value = 0.0;

  friend bool operator==(const BlockEntry&, const BlockEntry&) = default;
};

struct LmiBlock {
  int size = 0;
  bool diagonal = false;
  std::vector<BlockEntry> entries;

  friend bool operator==(const LmiBlock&, const LmiBlock&) = default;
};

// sum_k coeffs[k].second * y[coeffs[k].first] = rhs
struct LinearRow {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;

  friend bool operator==(const LinearRow&, const LinearRow&) = default;
};

struct NumericSDP {
  int nvars = 0;
  RealVector c;
  double offset = 0.0;
  std::vector<LmiBlock> blocks;
  std::vector<LinearRow> equalities;

  friend bool operator==(const NumericSDP& a, const NumericSDP& b) {
    return a.nvars == b.nvars && a.c.size() == b.c.size() && a.c == b.c && a.offset == b.offset &&
           a.blocks == b.blocks && a.equalities == b.equalities;
  }

  int largest_block() const {
    int m = 0;
    for (const auto& b : blocks) m = std::max(m, b.size);
    return m;
  }

  // Sorts entries, merges duplicates and drops zeros; validates indices.
  void canonicalize() {
    if (c.size() != nvars) throw invalid_input("NumericSDP: objective length differs from nvars");
    for (auto& b : blocks) {
      if (b.size < 1) throw invalid_input("NumericSDP: block size must be positive");
      for (auto& e : b.entries) {
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.var < -1 || e.var >= nvars || e.i < 0 || e.j >= b.size) {
          throw invalid_input("NumericSDP: block entry out of range");
        }
        if (b.diagonal && e.i != e.j) throw invalid_input("NumericSDP: off-diagonal entry in a diagonal block");
      }
      std::sort(b.entries.begin(), b.entries.end(), [](const BlockEntry& x, const BlockEntry& y) {
        return std::tie(x.var, x.i, x.j) < std::tie(y.var, y.i, y.j);
      });
      std::vector<BlockEntry> merged;
      for (const auto& e : b.entries) {
        if (!merged.empty() && merged.back().var == e.var && merged.back().i == e.i && merged.back().j == e.j) {
          merged.back().value += e.value;
        } else {
          merged.push_back(e);
        }
      }
      std::erase_if(merged, [](const BlockEntry& e) { return e.value == 0.0; });
      b.entries = std::move(merged);
    }
    for (auto& row : equalities) {
      std::map<int, double> acc;
      for (const auto& [v, a] : row.coeffs) {
        if (v < 0 || v >= nvars) throw invalid_input("NumericSDP: equality variable out of range");
        acc[v] += a;
      }
      row.coeffs.clear();
      for (const auto& [v, a] : acc)
        if (a != 0.0) row.coeffs.emplace_back(v, a);
    }
  }

  // F^b(y) as a dense matrix.
  RealMatrix block_value(std::size_t b, const RealVector& y) const {
    const auto& blk = blocks[b];
    RealMatrix m = RealMatrix::Zero(blk.size, blk.size);
    for (const auto& e : blk.entries) {
      const double v = e.var < 0 ? e.value : e.value * y(e.var);
      m(e.i, e.j) += v;
      if (e.i != e.j) m(e.j, e.i) += v;
    }
    return m;
  }
};

enum class SolveStatus { optimal, max_iter, infeasible_suspect };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iter:
      return "max_iter";
    default:
      return "infeasible-suspect";
  }
}

struct SDPSolution {
  RealVector y;
  double primal_value = 0.0;
  double dual_value = 0.0;
  SolveStatus status = SolveStatus::infeasible_suspect;
  double gap = 0.0;
  int iterations = 0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  // Dual matrices per block; empty when unavailable (e.g. imported y only).
  std::vector<RealMatrix> x;
  std::string message;
};

struct SolveOptions {
  double tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 100;
  int max_block = 600;
  int max_vars = 40000;
};

class budget_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Presolved {
  NumericSDP problem;
  std::vector<int> kept;  // original index of each remaining variable
};

// Exact reduction. A row holding a variable that appears in no block, not in
// the objective and in no other row can always be satisfied through that
// variable, so the row is dropped; repeat until none is left, then drop
// variables that appear nowhere.
inline Presolved presolve_free_rows(const NumericSDP& input) {
  NumericSDP p = input;
  p.canonicalize();
  const auto n = static_cast<std::size_t>(p.nvars);
  std::vector<char> pinned(n, 0);
  for (const auto& b : p.blocks)
    for (const auto& e : b.entries)
      if (e.var >= 0) pinned[static_cast<std::size_t>(e.var)] = 1;
  for (int v = 0; v < p.nvars; ++v)
    if (p.c(v) != 0.0) pinned[static_cast<std::size_t>(v)] = 1;
  std::vector<int> count(n, 0);
  std::vector<std::vector<int>> rows_of(n);
  for (std::size_t r = 0; r < p.equalities.size(); ++r)
    for (const auto& [v, a] : p.equalities[r].coeffs) {
      ++count[static_cast<std::size_t>(v)];
      if (!pinned[static_cast<std::size_t>(v)]) rows_of[static_cast<std::size_t>(v)].push_back(static_cast<int>(r));
    }
  std::vector<char> dropped(p.equalities.size(), 0);
  std::vector<int> queue;
  for (std::size_t v = 0; v < n; ++v)
    if (!pinned[v] && count[v] == 1) queue.push_back(static_cast<int>(v));
  while (!queue.empty()) {
    const auto v = static_cast<std::size_t>(queue.back());
    queue.pop_back();
    if (count[v] != 1) continue;
    for (const int r : rows_of[v]) {
      if (dropped[static_cast<std::size_t>(r)]) continue;
      dropped[static_cast<std::size_t>(r)] = 1;
      for (const auto& [w, a] : p.equalities[static_cast<std::size_t>(r)].coeffs) {
        const auto wi = static_cast<std::size_t>(w);
        if (--count[wi] == 1 && !pinned[wi]) queue.push_back(w);
      }
    }
  }
  Presolved out;
  std::vector<int> index(n, -1);
  for (std::size_t v = 0; v < n; ++v)
    if (pinned[v] || count[v] > 0) {
      index[v] = static_cast<int>(out.kept.size());
      out.kept.push_back(static_cast<int>(v));
    }
  NumericSDP& q = out.problem;
  q.nvars = static_cast<int>(out.kept.size());
  q.c = RealVector(q.nvars);
  for (int k = 0; k < q.nvars; ++k) q.c(k) = p.c(out.kept[static_cast<std::size_t>(k)]);
  q.offset = p.offset;
  q.blocks = std::move(p.blocks);
  for (auto& b : q.blocks)
    for (auto& e : b.entries)
      if (e.var >= 0) e.var = index[static_cast<std::size_t>(e.var)];
  for (std::size_t r = 0; r < p.equalities.size(); ++r) {
    if (dropped[r]) continue;
    LinearRow row = std::move(p.equalities[r]);
    for (auto& [v, a] : row.coeffs) v = index[static_cast<std::size_t>(v)];
    q.equalities.push_back(std::move(row));
  }
  return out;
}

// Variables are the non-constant moments in table order; y(1) = 1 moves into
// F_0, the objective offset and the equality right-hand sides.
inline NumericSDP lower_numeric(const SymbolicSDP& s) {
  if (s.moments.empty() || !s.moments.front().is_one()) {
    throw invalid_input("lower_numeric: variable table must start with the constant moment");
  }
  NumericSDP p;
  p.nvars = static_cast<int>(s.moments.size()) - 1;
  p.c = RealVector::Zero(p.nvars);
  auto var_of = [&s](const Monomial& m) {
    const auto k = s.moment_index(m);
    if (k < 0) throw invalid_input("lower_numeric: moment missing from the variable table");
    return static_cast<int>(k) - 1;
  };
  for (const auto& [m, a] : s.objective.terms()) {
    const int v = var_of(m);
    if (v < 0) {
      p.offset += a;
    } else {
      p.c(v) += a;
    }
  }
  for (const auto& blk : s.psd_blocks) {
    if (blk.cells.rows() != blk.cells.cols()) throw invalid_input("lower_numeric: block must be square");
    LmiBlock out;
    out.size = blk.cells.rows();
    for (int i = 0; i < out.size; ++i)
      for (int j = i; j < out.size; ++j)
        for (const auto& [m, a] : blk.cells(i, j).terms()) out.entries.push_back({var_of(m), i, j, a});
    p.blocks.push_back(std::move(out));
  }
  for (const auto& form : s.equalities) {
    LinearRow row;
    for (const auto& [m, a] : form.terms()) {
      const int v = var_of(m);
      if (v < 0) {
        row.rhs -= a;
      } else {
        row.coeffs.emplace_back(v, a);
      }
    }
    p.equalities.push_back(std::move(row));
  }
  p.canonicalize();
  return p;
}

// Dirac moments of a point: y_k = x^{moments[k+1]}.
inline RealVector dirac_moments(const SymbolicSDP& s, const RealVector& x) {
  RealVector y(static_cast<Eigen::Index>(s.moments.size()) - 1);
  for (std::size_t k = 1; k < s.moments.size(); ++k) y(static_cast<Eigen::Index>(k) - 1) = s.moments[k].evaluate(x);
  return y;
}

struct CertificateReport {
  std::vector<double> block_min_eig;
  double min_eig = std::numeric_limits<double>::infinity();
  double equality_residual = 0.0;
  double objective = 0.0;
  double objective_error = 0.0;
  bool has_dual = false;
  double dual_min_eig = std::numeric_limits<double>::infinity();
  double dual_residual = 0.0;
  double dual_objective = 0.0;
  bool pass = false;

  std::string summary() const {
    auto g = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", v);
      return std::string(buf);
    };
    std::string s = "min_eig=" + g(min_eig) + " eq_residual=" + g(equality_residual) +
                    " objective=" + format_coefficient(objective) + " objective_error=" + g(objective_error);
    if (has_dual) {
      s += " dual_min_eig=" + g(dual_min_eig) + " dual_residual=" + g(dual_residual) +
           " dual_objective=" + format_coefficient(dual_objective);
    }
    return s + (pass ? " PASS" : " FAIL");
  }
};

namespace detail {

inline double min_eigenvalue(const RealMatrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Least-squares multipliers for A^T lambda = r.
inline RealVector equality_multipliers(const NumericSDP& p, const RealVector& r) {
  const auto m = static_cast<Eigen::Index>(p.equalities.size());
  if (m == 0) return RealVector();
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index k = 0; k < m; ++k)
    for (const auto& [v, a] : p.equalities[static_cast<std::size_t>(k)].coeffs) trips.emplace_back(v, k, a);
  Eigen::SparseMatrix<double> at(p.nvars, m);
  at.setFromTriplets(trips.begin(), trips.end());
  at.makeCompressed();
  if (static_cast<double>(m) * p.nvars > 1e8) {
    // Sparse QR fill-in is prohibitive at this size.
    Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> cg;
    cg.setTolerance(1e-14);
    cg.setMaxIterations(20 * m);
    cg.compute(at);
    RealVector lambda = cg.solve(r);
    return lambda.allFinite() ? lambda : RealVector::Zero(m);
  }
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
  qr.compute(at);
  if (qr.info() != Eigen::Success) return RealVector::Zero(m);
  RealVector lambda = qr.solve(r);
  if (!lambda.allFinite()) return RealVector::Zero(m);
  return lambda;
}

}  // namespace detail

// Primal: block eigenvalues at y, equality residual, objective recomputation
// against sol.primal_value. Dual (when sol.x is present): eigenvalues of X
// and the residual of c - <F_i, X> after the best equality multipliers.
inline CertificateReport check_certificate(const NumericSDP& p, const SDPSolution& sol, double tol = 1e-8) {
  CertificateReport r;
  if (sol.y.size() != p.nvars) throw invalid_input("check_certificate: solution length differs from nvars");
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const double e = detail::min_eigenvalue(p.block_value(b, sol.y));
    r.block_min_eig.push_back(e);
    r.min_eig = std::min(r.min_eig, e);
  }
  for (const auto& row : p.equalities) {
    double lhs = 0.0;
    for (const auto& [v, a] : row.coeffs) lhs += a * sol.y(v);
    r.equality_residual = std::max(r.equality_residual, std::abs(lhs - row.rhs));
  }
  r.objective = p.c.dot(sol.y) + p.offset;
  r.objective_error = std::abs(r.objective - sol.primal_value);
  bool pass = r.min_eig >= -tol && r.equality_residual <= tol && r.objective_error <= tol * std::max(1.0, std::abs(r.objective));
  if (!sol.x.empty()) {
    if (sol.x.size() != p.blocks.size()) throw invalid_input("check_certificate: dual block count mismatch");
    r.has_dual = true;
    RealVector resid = p.c;
    r.dual_objective = p.offset;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      const RealMatrix& x = sol.x[b];
      if (x.rows() != p.blocks[b].size || x.cols() != p.blocks[b].size) {
        throw invalid_input("check_certificate: dual block size mismatch");
      }
      r.dual_min_eig = std::min(r.dual_min_eig, detail::min_eigenvalue(0.5 * (x + x.transpose())));
      for (const auto& e : p.blocks[b].entries) {
        const double w = e.i == e.j ? e.value * x(e.i, e.i) : e.value * (x(e.i, e.j) + x(e.j, e.i));
        if (e.var < 0) {
          r.dual_objective -= w;
        } else {
          resid(e.var) -= w;
        }
      }
    }
    if (!p.equalities.empty()) {
      const RealVector lambda = detail::equality_multipliers(p, resid);
      for (std::size_t k = 0; k < p.equalities.size(); ++k) {
        for (const auto& [v, a] : p.equalities[k].coeffs) resid(v) -= a * lambda(static_cast<Eigen::Index>(k));
        r.dual_objective += p.equalities[k].rhs * lambda(static_cast<Eigen::Index>(k));
      }
    }
    r.dual_residual = resid.size() ? resid.lpNorm<Eigen::Infinity>() : 0.0;
    pass = pass && r.dual_min_eig >= -tol && r.dual_residual <= tol * std::max(1.0, p.c.lpNorm<Eigen::Infinity>());
  }
  r.pass = pass;
  return r;
}

namespace detail {

using SparseRow = std::vector<std::pair<int, double>>;

// Result of eliminating A y = b: y = y0 + T z over the free variables z.
struct Elimination {
  std::vector<int> free_vars;     // original index of each z
  RealVector y0;                  // particular part
  std::vector<SparseRow> map;     // per original variable: (z index, coeff)
  bool consistent = true;
  std::string message;
};

inline Elimination eliminate_equalities(const NumericSDP& p, const std::vector<int>& block_weight) {
  const int n = p.nvars;
  // expr[v]: y_v = const + sum coeff * y_w over still-free w.
  std::vector<SparseRow> expr(static_cast<std::size_t>(n));
  std::vector<double> expr_const(static_cast<std::size_t>(n), 0.0);
  std::vector<char> eliminated(static_cast<std::size_t>(n), 0);
  // Which eliminated variables' expressions mention w.
  std::vector<std::vector<int>> users(static_cast<std::size_t>(n));

  Elimination out;
  double scale = 1.0;
  for (const auto& row : p.equalities)
    for (const auto& [v, a] : row.coeffs) scale = std::max(scale, std::abs(a));

  auto substitute = [&](const SparseRow& in, double rhs, SparseRow& row_out, double& rhs_out) {
    std::map<int, double> acc;
    rhs_out = rhs;
    for (const auto& [v, a] : in) {
      if (eliminated[static_cast<std::size_t>(v)]) {
        rhs_out -= a * expr_const[static_cast<std::size_t>(v)];
        for (const auto& [w, b] : expr[static_cast<std::size_t>(v)]) acc[w] += a * b;
      } else {
        acc[v] += a;
      }
    }
    double big = 0.0;
    for (const auto& [v, a] : acc) big = std::max(big, std::abs(a));
    row_out.clear();
    for (const auto& [v, a] : acc)
      if (std::abs(a) > 1e-13 * std::max(big, 1.0)) row_out.emplace_back(v, a);
  };

  for (const auto& raw : p.equalities) {
    SparseRow row;
    double rhs = 0.0;
    substitute(raw.coeffs, raw.rhs, row, rhs);
    if (row.empty()) {
      if (std::abs(rhs) > 1e-9 * scale) {
        out.consistent = false;
        out.message = "equality constraints are inconsistent (residual " + std::to_string(rhs) + ")";
      }
      continue;
    }
    double big = 0.0;
    for (const auto& [v, a] : row) big = std::max(big, std::abs(a));
    // Threshold pivoting: among large enough coefficients prefer variables
    // with the fewest block entries, then the fewest dependants.
    int pivot = -1;
    double pivot_coeff = 0.0;
    std::pair<long, long> best_cost{std::numeric_limits<long>::max(), 0};
    for (const auto& [v, a] : row) {
      if (std::abs(a) < 0.1 * big) continue;
      const std::pair<long, long> cost{block_weight[static_cast<std::size_t>(v)],
                                       static_cast<long>(users[static_cast<std::size_t>(v)].size())};
      if (cost < best_cost) {
        best_cost = cost;
        pivot = v;
        pivot_coeff = a;
      }
    }
    // y_pivot = (rhs - sum_{w != pivot} a_w y_w) / a_pivot
    SparseRow e;
    for (const auto& [v, a] : row)
      if (v != pivot) e.emplace_back(v, -a / pivot_coeff);
    const double e0 = rhs / pivot_coeff;
    // Rewrite earlier expressions that mention the pivot.
    for (const int u : users[static_cast<std::size_t>(pivot)]) {
      auto& target = expr[static_cast<std::size_t>(u)];
      const auto it = std::find_if(target.begin(), target.end(), [pivot](const auto& t) { return t.first == pivot; });
      if (it == target.end()) continue;
      const double f = it->second;
      target.erase(it);
      std::map<int, double> acc(target.begin(), target.end());
      for (const auto& [w, b] : e) acc[w] += f * b;
      expr_const[static_cast<std::size_t>(u)] += f * e0;
      target.clear();
      for (const auto& [w, b] : acc)
        if (b != 0.0) {
          target.emplace_back(w, b);
          auto& list = users[static_cast<std::size_t>(w)];
          if (list.empty() || list.back() != u) list.push_back(u);
        }
    }
    users[static_cast<std::size_t>(pivot)].clear();
    expr[static_cast<std::size_t>(pivot)] = e;
    expr_const[static_cast<std::size_t>(pivot)] = e0;
    eliminated[static_cast<std::size_t>(pivot)] = 1;
    for (const auto& [w, b] : e) users[static_cast<std::size_t>(w)].push_back(pivot);
  }

  std::vector<int> z_of(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v)
    if (!eliminated[static_cast<std::size_t>(v)]) {
      z_of[static_cast<std::size_t>(v)] = static_cast<int>(out.free_vars.size());
      out.free_vars.push_back(v);
    }
  out.y0 = RealVector::Zero(n);
  out.map.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    if (eliminated[static_cast<std::size_t>(v)]) {
      out.y0(v) = expr_const[static_cast<std::size_t>(v)];
      for (const auto& [w, b] : expr[static_cast<std::size_t>(v)]) {
        out.map[static_cast<std::size_t>(v)].emplace_back(z_of[static_cast<std::size_t>(w)], b);
      }
    } else {
      out.map[static_cast<std::size_t>(v)].emplace_back(z_of[static_cast<std::size_t>(v)], 1.0);
    }
  }
  return out;
}

struct DenseEntry {
  int i, j;
  double v;
};

// Reduced problem: one dense-stored block per PSD block (diagonal blocks are
// split into 1x1 blocks), coefficient matrices as full symmetric entry lists.
struct ReducedBlock {
  int size = 0;
  std::size_t source = 0;  // index into the original block list
  int offset = 0;          // position inside a split diagonal block
  RealMatrix f0;
  std::vector<int> vars;                       // sorted reduced variable ids
  std::vector<std::vector<DenseEntry>> coeff;  // aligned with vars
};

struct ReducedProblem {
  int nz = 0;
  RealVector c;
  double offset = 0.0;
  std::vector<ReducedBlock> blocks;
};

inline ReducedProblem reduce(const NumericSDP& p, const Elimination& el) {
  ReducedProblem r;
  r.nz = static_cast<int>(el.free_vars.size());
  r.c = RealVector::Zero(r.nz);
  r.offset = p.offset + p.c.dot(el.y0);
  for (int v = 0; v < p.nvars; ++v)
    for (const auto& [z, b] : el.map[static_cast<std::size_t>(v)]) r.c(z) += p.c(v) * b;

  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    const int parts = blk.diagonal ? blk.size : 1;
    const int size = blk.diagonal ? 1 : blk.size;
    std::vector<std::map<int, std::map<std::pair<int, int>, double>>> acc(static_cast<std::size_t>(parts));
    std::vector<RealMatrix> f0(static_cast<std::size_t>(parts), RealMatrix::Zero(size, size));
    for (const auto& e : blk.entries) {
      const int part = blk.diagonal ? e.i : 0;
      const int i = blk.diagonal ? 0 : e.i;
      const int j = blk.diagonal ? 0 : e.j;
      auto& m0 = f0[static_cast<std::size_t>(part)];
      if (e.var < 0) {
        m0(i, j) += e.value;
        if (i != j) m0(j, i) += e.value;
        continue;
      }
      const double y0 = el.y0(e.var);
      if (y0 != 0.0) {
        m0(i, j) += e.value * y0;
        if (i != j) m0(j, i) += e.value * y0;
      }
      for (const auto& [z, coef] : el.map[static_cast<std::size_t>(e.var)]) acc[static_cast<std::size_t>(part)][z][{i, j}] += e.value * coef;
    }
    for (int part = 0; part < parts; ++part) {
      ReducedBlock rb;
      rb.size = size;
      rb.source = b;
      rb.offset = part;
      rb.f0 = f0[static_cast<std::size_t>(part)];
      for (const auto& [z, cells] : acc[static_cast<std::size_t>(part)]) {
        std::vector<DenseEntry> entries;
        double big = 0.0;
        for (const auto& [ij, v] : cells) big = std::max(big, std::abs(v));
        for (const auto& [ij, v] : cells) {
          if (std::abs(v) <= 1e-15 * big) continue;
          entries.push_back({ij.first, ij.second, v});
          if (ij.first != ij.second) entries.push_back({ij.second, ij.first, v});
        }
        if (entries.empty()) continue;
        rb.vars.push_back(z);
        rb.coeff.push_back(std::move(entries));
      }
      r.blocks.push_back(std::move(rb));
    }
  }
  return r;
}

inline double inner(const std::vector<DenseEntry>& f, const RealMatrix& y) {
  double s = 0.0;
  for (const auto& e : f) s += e.v * y(e.i, e.j);
  return s;
}

// Largest step in (0, inf] keeping M + a D positive definite; M = L L^T.
inline double max_step(const Eigen::LLT<RealMatrix>& llt, const RealMatrix& d) {
  RealMatrix t = llt.matrixL().solve(d);
  t = llt.matrixL().solve(t.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (t + t.transpose()), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

// Variables whose coefficient matrices are linear combinations of other
// variables' matrices. Returns the flags and whether the cost of some such
// variable disagrees with the combination (which makes the problem unbounded).
inline std::pair<std::vector<char>, bool> dependent_vars(const ReducedProblem& r, const std::vector<char>& in_block) {
  std::vector<char> dep(static_cast<std::size_t>(r.nz), 0);
  std::vector<int> cols;
  for (int z = 0; z < r.nz; ++z)
    if (in_block[static_cast<std::size_t>(z)]) cols.push_back(z);
  if (cols.empty()) return {dep, false};
  std::vector<int> col_of(static_cast<std::size_t>(r.nz), -1);
  for (std::size_t k = 0; k < cols.size(); ++k) col_of[static_cast<std::size_t>(cols[k])] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::Index row0 = 0;
  for (const auto& blk : r.blocks) {
    for (std::size_t l = 0; l < blk.vars.size(); ++l)
      for (const auto& e : blk.coeff[l])
        if (e.i <= e.j) {
          const Eigen::Index row = row0 + e.i * blk.size - e.i * (e.i - 1) / 2 + (e.j - e.i);
          trips.emplace_back(row, col_of[static_cast<std::size_t>(blk.vars[l])], e.i == e.j ? e.v : std::sqrt(2.0) * e.v);
        }
    row0 += static_cast<Eigen::Index>(blk.size) * (blk.size + 1) / 2;
  }
  const auto ncols = static_cast<Eigen::Index>(cols.size());
  if (row0 >= ncols && static_cast<Eigen::Index>(trips.size()) == 0) return {dep, false};
  Eigen::SparseMatrix<double> v(row0, ncols);
  v.setFromTriplets(trips.begin(), trips.end());
  v.makeCompressed();
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
  double big = 0.0;
  for (Eigen::Index k = 0; k < ncols; ++k) big = std::max(big, v.col(k).norm());
  qr.setPivotThreshold(1e-10 * std::max(big, 1.0));
  qr.compute(v);
  if (qr.info() != Eigen::Success) return {dep, false};
  const Eigen::Index rank = qr.rank();
  if (rank == ncols) return {dep, false};
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> keep;
  for (Eigen::Index k = 0; k < ncols; ++k) {
    const int z = cols[static_cast<std::size_t>(perm(k))];
    if (k < rank) {
      keep.push_back(z);
    } else {
      dep[static_cast<std::size_t>(z)] = 1;
    }
  }
  // Cost consistency: c must lie in the span of the kept columns' images.
  Eigen::SparseMatrix<double> vk(row0, static_cast<Eigen::Index>(keep.size()));
  {
    std::vector<Eigen::Triplet<double>> kt;
    std::vector<int> kcol(static_cast<std::size_t>(r.nz), -1);
    for (std::size_t k = 0; k < keep.size(); ++k) kcol[static_cast<std::size_t>(keep[k])] = static_cast<int>(k);
    for (const auto& t : trips) {
      const int z = cols[static_cast<std::size_t>(t.col())];
      if (kcol[static_cast<std::size_t>(z)] >= 0) kt.emplace_back(t.row(), kcol[static_cast<std::size_t>(z)], t.value());
    }
    vk.setFromTriplets(kt.begin(), kt.end());
    vk.makeCompressed();
  }
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qk;
  qk.compute(vk);
  double cscale = 1.0;
  for (const int z : cols) cscale = std::max(cscale, std::abs(r.c(z)));
  bool unbounded = false;
  for (int z = 0; z < r.nz && !unbounded; ++z) {
    if (!dep[static_cast<std::size_t>(z)]) continue;
    const RealVector col = RealVector(v.col(col_of[static_cast<std::size_t>(z)]));
    const RealVector alpha = qk.solve(col);
    double predicted = 0.0;
    for (std::size_t k = 0; k < keep.size(); ++k) predicted += alpha(static_cast<Eigen::Index>(k)) * r.c(keep[k]);
    unbounded = std::abs(predicted - r.c(z)) > 1e-8 * cscale * std::max(1.0, alpha.lpNorm<1>());
  }
  return {dep, unbounded};
}

}  // namespace detail

inline SDPSolution solve(const NumericSDP& input, const SolveOptions& opts = {}) {
  if (!(opts.tol > 0.0)) throw invalid_input("solve: tol must be positive");
  if (input.largest_block() > opts.max_block || input.nvars > opts.max_vars) {
    throw budget_exceeded("problem exceeds the internal solver budget (largest block " +
                          std::to_string(input.largest_block()) + ", " + std::to_string(input.nvars) +
                          " variables); export it in SDPA format and validate an external solution with "
                          "check-cert");
  }
  NumericSDP p = input;
  p.canonicalize();

  std::vector<int> weight(static_cast<std::size_t>(p.nvars), 0);
  for (const auto& b : p.blocks)
    for (const auto& e : b.entries)
      if (e.var >= 0) ++weight[static_cast<std::size_t>(e.var)];
  for (int v = 0; v < p.nvars; ++v)
    if (p.c(v) != 0.0) ++weight[static_cast<std::size_t>(v)];

  SDPSolution sol;
  const detail::Elimination el = detail::eliminate_equalities(p, weight);
  if (!el.consistent) {
    sol.status = SolveStatus::infeasible_suspect;
    sol.message = el.message;
    sol.y = el.y0;
    return sol;
  }
  detail::ReducedProblem r = detail::reduce(p, el);

  // Variables that touch no block are either irrelevant (fixed at 0) or make
  // the problem unbounded.
  std::vector<char> in_block(static_cast<std::size_t>(r.nz), 0);
  for (const auto& b : r.blocks)
    for (const int z : b.vars) in_block[static_cast<std::size_t>(z)] = 1;
  const double cscale = std::max(1.0, r.c.lpNorm<Eigen::Infinity>());
  for (int z = 0; z < r.nz; ++z) {
    if (!in_block[static_cast<std::size_t>(z)] && std::abs(r.c(z)) > 1e-12 * cscale) {
      sol.status = SolveStatus::infeasible_suspect;
      sol.message = "objective is unbounded: a variable with nonzero cost appears in no PSD block";
      sol.y = el.y0;
      return sol;
    }
  }
  const auto [dependent, dep_unbounded] = detail::dependent_vars(r, in_block);
  if (dep_unbounded) {
    sol.status = SolveStatus::infeasible_suspect;
    sol.message = "objective is unbounded along a direction that leaves every PSD block unchanged";
    sol.y = el.y0;
    return sol;
  }
  for (int z = 0; z < r.nz; ++z)
    if (dependent[static_cast<std::size_t>(z)]) in_block[static_cast<std::size_t>(z)] = 0;
  // Compact to block-touching variables.
  std::vector<int> slot(static_cast<std::size_t>(r.nz), -1);
  std::vector<int> active;
  for (int z = 0; z < r.nz; ++z)
    if (in_block[static_cast<std::size_t>(z)]) {
      slot[static_cast<std::size_t>(z)] = static_cast<int>(active.size());
      active.push_back(z);
    }
  for (auto& b : r.blocks) {
    std::vector<int> vars;
    std::vector<std::vector<detail::DenseEntry>> coeff;
    for (std::size_t l = 0; l < b.vars.size(); ++l) {
      const int k = slot[static_cast<std::size_t>(b.vars[l])];
      if (k < 0) continue;
      vars.push_back(k);
      coeff.push_back(std::move(b.coeff[l]));
    }
    b.vars = std::move(vars);
    b.coeff = std::move(coeff);
  }
  const auto n = static_cast<Eigen::Index>(active.size());
  RealVector c(n);
  for (Eigen::Index k = 0; k < n; ++k) c(k) = r.c(active[static_cast<std::size_t>(k)]);

  const std::size_t nb = r.blocks.size();
  std::vector<std::vector<int>> var_blocks(static_cast<std::size_t>(n));
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t l = 0; l < r.blocks[b].vars.size(); ++l) var_blocks[static_cast<std::size_t>(r.blocks[b].vars[l])].push_back(static_cast<int>(b));

  auto assemble_y = [&](const RealVector& z) {
    RealVector zf = RealVector::Zero(r.nz);
    for (Eigen::Index k = 0; k < n; ++k) zf(active[static_cast<std::size_t>(k)]) = z(k);
    RealVector y = el.y0;
    for (int v = 0; v < p.nvars; ++v) {
      double s = 0.0;
      for (const auto& [zi, b] : el.map[static_cast<std::size_t>(v)]) s += b * zf(zi);
      y(v) += s;
    }
    return y;
  };
  auto affine = [&](std::size_t b, const RealVector& z) {
    RealMatrix m = r.blocks[b].f0;
    const auto& blk = r.blocks[b];
    for (std::size_t l = 0; l < blk.vars.size(); ++l) {
      const double zl = z(blk.vars[l]);
      if (zl == 0.0) continue;
      for (const auto& e : blk.coeff[l]) m(e.i, e.j) += e.v * zl;
    }
    return m;
  };
  auto lift_x = [&](const std::vector<RealMatrix>& xs) {
    std::vector<RealMatrix> out;
    for (const auto& b : p.blocks) out.push_back(RealMatrix::Zero(b.size, b.size));
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& rb = r.blocks[b];
      if (p.blocks[rb.source].diagonal) {
        out[rb.source](rb.offset, rb.offset) = xs[b](0, 0);
      } else {
        out[rb.source] = xs[b];
      }
    }
    return out;
  };
  auto finish = [&](const RealVector& z, const std::vector<RealMatrix>& xs, SolveStatus st, int iters) {
    sol.y = assemble_y(z);
    sol.primal_value = p.c.dot(sol.y) + p.offset;
    double d = r.offset;
    for (std::size_t b = 0; b < nb; ++b) d -= (r.blocks[b].f0.array() * xs[b].array()).sum();
    sol.dual_value = d;
    sol.gap = std::abs(sol.primal_value - sol.dual_value);
    sol.status = st;
    sol.iterations = iters;
    sol.x = lift_x(xs);
    return sol;
  };

  std::vector<RealMatrix> xs(nb), ss(nb);
  if (n == 0) {
    bool feasible = true;
    for (std::size_t b = 0; b < nb; ++b) {
      xs[b] = RealMatrix::Zero(r.blocks[b].size, r.blocks[b].size);
      feasible = feasible && detail::min_eigenvalue(r.blocks[b].f0) >= -opts.feas_tol;
    }
    finish(RealVector(), xs, feasible ? SolveStatus::optimal : SolveStatus::infeasible_suspect, 0);
    if (!feasible) sol.message = "constant blocks are not PSD";
    return sol;
  }

  // Initial point (SDPT3-style scaling).
  double total_size = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& blk = r.blocks[b];
    const double sz = blk.size;
    total_size += sz;
    double x0 = std::max(10.0, std::sqrt(sz));
    double s0 = std::max({10.0, std::sqrt(sz), blk.f0.norm()});
    for (std::size_t l = 0; l < blk.vars.size(); ++l) {
      double fn = 0.0;
      for (const auto& e : blk.coeff[l]) fn += e.v * e.v;
      fn = std::sqrt(fn);
      x0 = std::max(x0, sz * (1.0 + std::abs(c(blk.vars[l]))) / (1.0 + fn));
      s0 = std::max(s0, fn);
    }
    xs[b] = x0 * RealMatrix::Identity(blk.size, blk.size);
    ss[b] = s0 * RealMatrix::Identity(blk.size, blk.size);
  }
  RealVector z = RealVector::Zero(n);
  const double f0_norm = [&] {
    double s = 0.0;
    for (const auto& b : r.blocks) s += b.f0.squaredNorm();
    return std::sqrt(s);
  }();
  const double c_norm = c.norm();

  constexpr double kStepFraction = 0.95;
  int iter = 0;
  SolveStatus status = SolveStatus::max_iter;
  // Near the optimum rounding eventually wins; the most accurate iterate seen
  // is what a breakdown falls back to.
  struct Snapshot {
    double merit = std::numeric_limits<double>::infinity();
    double pinf = 0.0, dinf = 0.0;
    RealVector z;
    std::vector<RealMatrix> xs;
  } best;
  int best_iter = 0;
  auto fall_back = [&] {
    if (!std::isfinite(best.merit)) return;
    z = best.z;
    xs = best.xs;
    sol.primal_infeasibility = best.pinf;
    sol.dual_infeasibility = best.dinf;
    if (best.merit <= 1.0) {
      status = SolveStatus::optimal;
      sol.message.clear();
    }
  };
  for (; iter < opts.max_iter; ++iter) {
    // Residuals.
    std::vector<RealMatrix> rs(nb);
    double pinf = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      rs[b] = affine(b, z) - ss[b];
      pinf += rs[b].squaredNorm();
    }
    pinf = std::sqrt(pinf) / (1.0 + f0_norm);
    RealVector rd = c;
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t l = 0; l < r.blocks[b].vars.size(); ++l) rd(r.blocks[b].vars[l]) -= detail::inner(r.blocks[b].coeff[l], xs[b]);
    const double dinf = rd.norm() / (1.0 + c_norm);
    double pobj = c.dot(z) + r.offset;
    double dobj = r.offset;
    double mu = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      dobj -= (r.blocks[b].f0.array() * xs[b].array()).sum();
      mu += (xs[b].array() * ss[b].array()).sum();
    }
    mu /= total_size;
    const double gap = std::abs(pobj - dobj);
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;
    const double merit = std::max({gap / opts.tol, pinf / opts.feas_tol, dinf / opts.feas_tol});
    if (merit < best.merit) {
      best = {merit, pinf, dinf, z, xs};
      best_iter = iter;
    } else if (iter - best_iter > 10) {
      status = SolveStatus::infeasible_suspect;
      sol.message = "no progress in the last iterations";
      fall_back();
      break;
    }
    if (merit <= 1.0) {
      status = SolveStatus::optimal;
      break;
    }

    std::vector<Eigen::LLT<RealMatrix>> s_llt(nb), x_llt(nb);
    std::vector<RealMatrix> sinv(nb);
    bool broken = false;
    for (std::size_t b = 0; b < nb && !broken; ++b) {
      s_llt[b].compute(ss[b]);
      x_llt[b].compute(xs[b]);
      broken = s_llt[b].info() != Eigen::Success || x_llt[b].info() != Eigen::Success;
      if (!broken) sinv[b] = s_llt[b].solve(RealMatrix::Identity(ss[b].rows(), ss[b].cols()));
    }
    if (broken) {
      status = SolveStatus::infeasible_suspect;
      sol.message = "lost positive definiteness of the iterates";
      fall_back();
      break;
    }

    // Schur complement M_jk = tr(F_j X F_k S^-1).
    RealMatrix m = RealMatrix::Zero(n, n);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& blk = r.blocks[b];
      const int sz = blk.size;
      const RealMatrix& x = xs[b];
      const RealMatrix& si = sinv[b];
      std::size_t nnz_total = 0;
      for (const auto& f : blk.coeff) nnz_total += f.size();
      const double dense_cost = static_cast<double>(sz) * sz * sz + static_cast<double>(nnz_total);
      for (std::size_t li = 0; li < blk.vars.size(); ++li) {
        const auto& fi = blk.coeff[li];
        const int gi = blk.vars[li];
        if (static_cast<double>(fi.size()) * static_cast<double>(nnz_total) > dense_cost) {
          RealMatrix t = RealMatrix::Zero(sz, sz);  // F_i X
          for (const auto& e : fi) t.row(e.i) += e.v * x.row(e.j);
          const RealMatrix w = si * t;  // S^-1 F_i X
          for (std::size_t lk = li; lk < blk.vars.size(); ++lk) {
            double s = 0.0;
            for (const auto& e : blk.coeff[lk]) s += e.v * w(e.j, e.i);
            m(gi, blk.vars[lk]) += s;
          }
        } else {
          for (std::size_t lk = li; lk < blk.vars.size(); ++lk) {
            double s = 0.0;
            for (const auto& a : fi)
              for (const auto& e : blk.coeff[lk]) s += a.v * x(a.j, e.i) * e.v * si(e.j, a.i);
            m(gi, blk.vars[lk]) += s;
          }
        }
      }
    }
    m = m.selfadjointView<Eigen::Upper>();
    m.diagonal() *= 1.0 + 1e-12;
    Eigen::LLT<RealMatrix> m_llt(m);
    Eigen::LDLT<RealMatrix> m_ldlt;
    const bool use_ldlt = m_llt.info() != Eigen::Success;
    if (use_ldlt) m_ldlt.compute(m);
    auto solve_m = [&](const RealVector& rhs) -> RealVector { return use_ldlt ? RealVector(m_ldlt.solve(rhs)) : RealVector(m_llt.solve(rhs)); };

    // Direction for complementarity target sigma*mu and optional corrector.
    auto direction = [&](double target, const std::vector<RealMatrix>* corr, RealVector& dz, std::vector<RealMatrix>& dS,
                         std::vector<RealMatrix>& dX) {
      RealVector rhs = -rd;
      std::vector<RealMatrix> base(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        // target S^-1 - X - X Rs S^-1 - corr
        base[b] = target * sinv[b] - xs[b] - xs[b] * rs[b] * sinv[b];
        if (corr) base[b] -= (*corr)[b];
        for (std::size_t l = 0; l < r.blocks[b].vars.size(); ++l) rhs(r.blocks[b].vars[l]) += detail::inner(r.blocks[b].coeff[l], base[b]);
      }
      auto expand = [&] {
        dS.resize(nb);
        dX.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
          RealMatrix d = rs[b];
          const auto& blk = r.blocks[b];
          for (std::size_t l = 0; l < blk.vars.size(); ++l) {
            const double v = dz(blk.vars[l]);
            if (v == 0.0) continue;
            for (const auto& e : blk.coeff[l]) d(e.i, e.j) += e.v * v;
          }
          dS[b] = d;
          RealMatrix t = xs[b] * d * sinv[b];
          if (corr) t += (*corr)[b];
          dX[b] = target * sinv[b] - xs[b] - 0.5 * (t + t.transpose());
        }
      };
      // The Schur solve loses accuracy as mu -> 0; refine dz until
      // <F_j, dX> matches rd_j as evaluated from the expanded direction.
      auto mismatch = [&] {
        RealVector e = -rd;
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t l = 0; l < r.blocks[b].vars.size(); ++l) e(r.blocks[b].vars[l]) += detail::inner(r.blocks[b].coeff[l], dX[b]);
        return e;
      };
      dz = solve_m(rhs);
      expand();
      RealVector e = mismatch();
      for (int round = 0; round < 10; ++round) {
        const RealVector dz_prev = dz;
        const auto ds_prev = dS, dx_prev = dX;
        dz += solve_m(e);
        expand();
        const RealVector e_new = mismatch();
        if (!(e_new.norm() < 0.5 * e.norm())) {
          dz = dz_prev;
          dS = ds_prev;
          dX = dx_prev;
          break;
        }
        e = e_new;
      }
    };
    auto step_lengths = [&](const std::vector<RealMatrix>& dS, const std::vector<RealMatrix>& dX, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, detail::max_step(s_llt[b], dS[b]));
        ad = std::min(ad, detail::max_step(x_llt[b], dX[b]));
      }
    };

    RealVector dz_a;
    std::vector<RealMatrix> ds_a, dx_a;
    direction(0.0, nullptr, dz_a, ds_a, dx_a);
    double ap = 0.0, ad = 0.0;
    step_lengths(ds_a, dx_a, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) mu_aff += ((xs[b] + ad * dx_a[b]).array() * (ss[b] + ap * ds_a[b]).array()).sum();
    mu_aff /= total_size;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    std::vector<RealMatrix> corr(nb);
    for (std::size_t b = 0; b < nb; ++b) corr[b] = dx_a[b] * ds_a[b] * sinv[b];
    RealVector dz;
    std::vector<RealMatrix> ds, dx;
    direction(sigma * mu, &corr, dz, ds, dx);
    step_lengths(ds, dx, ap, ad);
    ap = std::min(1.0, kStepFraction * ap);
    ad = std::min(1.0, kStepFraction * ad);
    if (!dz.allFinite() || !(ap > 1e-12) || !(ad > 1e-12)) {
      status = SolveStatus::infeasible_suspect;
      sol.message = "step length collapsed";
      fall_back();
      break;
    }
    // The eigenvalue-based step bound can overshoot in rounding; shorten
    // each side until its new iterate factors.
    auto advance = [&](const std::vector<RealMatrix>& cur, const std::vector<RealMatrix>& dir, double& a) {
      std::vector<RealMatrix> next(nb);
      for (int attempt = 0; attempt < 30; ++attempt) {
        bool ok = true;
        for (std::size_t b = 0; b < nb && ok; ++b) {
          next[b] = cur[b] + a * dir[b];
          next[b] = 0.5 * (next[b] + next[b].transpose());
          ok = Eigen::LLT<RealMatrix>(next[b]).info() == Eigen::Success;
        }
        if (ok) return next;
        a *= 0.8;
      }
      return std::vector<RealMatrix>();
    };
    std::vector<RealMatrix> s_next = advance(ss, ds, ap);
    std::vector<RealMatrix> x_next = advance(xs, dx, ad);
    if (s_next.empty() || x_next.empty()) {
      status = SolveStatus::infeasible_suspect;
      sol.message = "lost positive definiteness of the iterates";
      fall_back();
      break;
    }
    z += ap * dz;
    ss = std::move(s_next);
    xs = std::move(x_next);
    double xnorm = 0.0, snorm = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      xnorm = std::max(xnorm, xs[b].cwiseAbs().maxCoeff());
      snorm = std::max(snorm, ss[b].cwiseAbs().maxCoeff());
    }
    if (xnorm > 1e14 || snorm > 1e14) {
      status = SolveStatus::infeasible_suspect;
      sol.message = xnorm > 1e14 ? "dual iterates diverge (primal infeasible?)" : "primal iterates diverge (dual infeasible?)";
      ++iter;
      break;
    }
  }
  if (status == SolveStatus::max_iter) fall_back();
  return finish(z, xs, status, iter);
}

}  // namespace aes

#pragma once

// Commutative polynomial algebra over real variables and the moment
// relaxation built on it: moment matrices, scalar and matrix localizing
// matrices, localized equalities, and symbolic SDP assembly.
//
// A linear form in moments sum_a c_a y_a is stored as the Polynomial
// sum_a c_a x^a; substituting a point x* into it gives the value of the
// form on the Dirac moments of x*.

#include "aes/core.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace aes {

// Product of variables, stored as a sorted multiset of variable indices.
class Monomial {
 public:
  static constexpr int kMaxDegree = 14;

  Monomial() = default;

  static Monomial variable(int index) {
    if (index < 0 || index > 0xFFFF) throw invalid_input("monomial: variable index out of range");
    Monomial m;
    m.vars_[0] = static_cast<std::uint16_t>(index);
    m.degree_ = 1;
    return m;
  }

  // From exponent vector (alpha_0, ..., alpha_{n-1}).
  static Monomial from_exponents(const std::vector<int>& alpha) {
    Monomial m;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] < 0) throw invalid_input("monomial: negative exponent");
      for (int p = 0; p < alpha[i]; ++p) m = m * variable(static_cast<int>(i));
    }
    return m;
  }

  int degree() const { return degree_; }
  bool is_one() const { return degree_ == 0; }
  int var(int k) const { return vars_[static_cast<std::size_t>(k)]; }
  int max_variable() const { return degree_ == 0 ? -1 : vars_[static_cast<std::size_t>(degree_ - 1)]; }

  std::vector<int> exponents(int nvars) const {
    std::vector<int> alpha(static_cast<std::size_t>(nvars), 0);
    for (int k = 0; k < degree_; ++k) {
      if (var(k) >= nvars) throw invalid_input("monomial: variable index exceeds nvars");
      ++alpha[static_cast<std::size_t>(var(k))];
    }
    return alpha;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    if (a.degree_ + b.degree_ > kMaxDegree) throw invalid_input("monomial: degree exceeds the supported maximum");
    Monomial m;
    std::merge(a.vars_.begin(), a.vars_.begin() + a.degree_, b.vars_.begin(), b.vars_.begin() + b.degree_,
               m.vars_.begin());
    m.degree_ = static_cast<std::uint8_t>(a.degree_ + b.degree_);
    return m;
  }

  // Graded lexicographic: lower degree first, then the sorted index lists
  // compared lexicographically (x1^2 < x1 x2 < x2^2).
  friend bool operator<(const Monomial& a, const Monomial& b) {
    if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
    return std::lexicographical_compare(a.vars_.begin(), a.vars_.begin() + a.degree_, b.vars_.begin(),
                                        b.vars_.begin() + b.degree_);
  }
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.degree_ == b.degree_ && std::equal(a.vars_.begin(), a.vars_.begin() + a.degree_, b.vars_.begin());
  }
  friend bool operator!=(const Monomial& a, const Monomial& b) { return !(a == b); }

  double evaluate(const RealVector& x) const {
    double v = 1.0;
    for (int k = 0; k < degree_; ++k) v *= x(var(k));
    return v;
  }

  std::size_t hash() const {
    std::size_t h = degree_;
    for (int k = 0; k < degree_; ++k) h = h * 0x9E3779B97F4A7C15ULL + vars_[static_cast<std::size_t>(k)] + 1;
    return h;
  }

 private:
  std::array<std::uint16_t, kMaxDegree> vars_{};
  std::uint8_t degree_ = 0;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

// Moment y_alpha, identified with the monomial x^alpha. y of the constant
// monomial is pinned to 1.
using MomentIndex = Monomial;

// Sparse real polynomial with terms sorted in graded-lex order and no zero
// coefficients.
class Polynomial {
 public:
  using Term = std::pair<Monomial, double>;

  Polynomial() = default;
  Polynomial(double c) {  // NOLINT(google-explicit-constructor)
    if (c != 0.0) terms_.emplace_back(Monomial(), c);
  }
  Polynomial(const Monomial& m, double c = 1.0) {  // NOLINT(google-explicit-constructor)
    if (c != 0.0) terms_.emplace_back(m, c);
  }

  static Polynomial variable(int index) { return Polynomial(Monomial::variable(index)); }

  static Polynomial from_terms(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
    Polynomial p;
    for (auto& t : terms) {
      if (!p.terms_.empty() && p.terms_.back().first == t.first) {
        p.terms_.back().second += t.second;
      } else {
        p.terms_.push_back(std::move(t));
      }
    }
    p.drop_zeros();
    return p;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const { return terms_.empty() ? 0 : terms_.back().first.degree(); }

  double coefficient(const Monomial& m) const {
    const auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                                     [](const Term& t, const Monomial& key) { return t.first < key; });
    return it != terms_.end() && it->first == m ? it->second : 0.0;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    out.terms_.reserve(a.terms_.size() + b.terms_.size());
    auto i = a.terms_.begin();
    auto j = b.terms_.begin();
    while (i != a.terms_.end() || j != b.terms_.end()) {
      if (j == b.terms_.end() || (i != a.terms_.end() && i->first < j->first)) {
        out.terms_.push_back(*i++);
      } else if (i == a.terms_.end() || j->first < i->first) {
        out.terms_.push_back(*j++);
      } else {
        const double c = i->second + j->second;
        if (c != 0.0) out.terms_.emplace_back(i->first, c);
        ++i;
        ++j;
      }
    }
    return out;
  }
  friend Polynomial operator*(double s, const Polynomial& p) {
    if (s == 0.0) return {};
    Polynomial out = p;
    for (auto& t : out.terms_) t.second *= s;
    return out;
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }
  Polynomial& operator+=(const Polynomial& other) { return *this = *this + other; }
  Polynomial& operator-=(const Polynomial& other) { return *this = *this - other; }

  // Multiplication by a monomial preserves the term order.
  friend Polynomial operator*(const Polynomial& p, const Monomial& m) {
    Polynomial out;
    out.terms_.reserve(p.terms_.size());
    for (const auto& t : p.terms_) out.terms_.emplace_back(t.first * m, t.second);
    return out;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<Term> terms;
    terms.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& s : a.terms_)
      for (const auto& t : b.terms_) terms.emplace_back(s.first * t.first, s.second * t.second);
    return from_terms(std::move(terms));
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t k = 0; k < a.terms_.size(); ++k)
      if (a.terms_[k].first != b.terms_[k].first || a.terms_[k].second != b.terms_[k].second) return false;
    return true;
  }

  double evaluate(const RealVector& x) const {
    double v = 0.0;
    for (const auto& t : terms_) v += t.second * t.first.evaluate(x);
    return v;
  }

 private:
  void drop_zeros() {
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const Term& t) { return t.second == 0.0; }),
                 terms_.end());
  }

  std::vector<Term> terms_;
};

// Linear form in moments; see the note at the top of this file.
using LinearForm = Polynomial;

class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols) : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows) * cols) {
    if (rows < 0 || cols < 0) throw invalid_input("PolyMatrix: negative size");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Polynomial& operator()(int i, int j) { return cells_[index(i, j)]; }
  const Polynomial& operator()(int i, int j) const { return cells_[index(i, j)]; }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i + 1; j < cols_; ++j)
        if (!((*this)(i, j) == (*this)(j, i))) return false;
    return true;
  }

  int degree() const {
    int d = 0;
    for (const auto& c : cells_) d = std::max(d, c.degree());
    return d;
  }

  RealMatrix evaluate(const RealVector& x) const {
    RealMatrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).evaluate(x);
    return out;
  }

  friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
  }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cols_ + j; }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Polynomial> cells_;
};

using MonomialBasis = std::vector<Monomial>;

// All monomials in variables first .. first+nvars-1 of degree <= degree, in
// graded-lex order.
inline MonomialBasis monomial_basis(int nvars, int degree, int first = 0) {
  if (nvars < 1) throw invalid_input("monomial_basis: nvars must be >= 1");
  if (degree < 0) throw invalid_input("monomial_basis: degree must be >= 0");
  MonomialBasis out{Monomial()};
  MonomialBasis layer{Monomial()};
  for (int d = 1; d <= degree; ++d) {
    MonomialBasis next;
    for (const auto& m : layer) {
      const int start = std::max(first, m.max_variable());
      for (int v = start; v < first + nvars; ++v) next.push_back(m * Monomial::variable(v));
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

// Degree-<=1 basis {1} u {x_v : v in vars}, vars kept in the given order.
inline MonomialBasis linear_basis(const std::vector<int>& vars) {
  MonomialBasis out{Monomial()};
  for (const int v : vars) out.push_back(Monomial::variable(v));
  return out;
}

// Union preserving first occurrence order.
inline MonomialBasis basis_union(const std::vector<MonomialBasis>& parts) {
  MonomialBasis out;
  std::unordered_set<Monomial, MonomialHash> seen;
  for (const auto& part : parts)
    for (const auto& m : part)
      if (seen.insert(m).second) out.push_back(m);
  return out;
}

inline int basis_degree(const MonomialBasis& basis) {
  int d = 0;
  for (const auto& m : basis) d = std::max(d, m.degree());
  return d;
}

inline PolyMatrix moment_matrix(const MonomialBasis& basis) {
  if (basis.empty()) throw invalid_input("moment_matrix: basis must be non-empty");
  const int n = static_cast<int>(basis.size());
  PolyMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      m(i, j) = Polynomial(basis[static_cast<std::size_t>(i)] * basis[static_cast<std::size_t>(j)]);
      m(j, i) = m(i, j);
    }
  return m;
}

inline PolyMatrix localizing_matrix_scalar(const Polynomial& g, const MonomialBasis& basis) {
  if (basis.empty()) throw invalid_input("localizing_matrix_scalar: basis must be non-empty");
  const int n = static_cast<int>(basis.size());
  PolyMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      m(i, j) = g * (basis[static_cast<std::size_t>(i)] * basis[static_cast<std::size_t>(j)]);
      m(j, i) = m(i, j);
    }
  return m;
}

// Ordering of rows in a matrix localizer of an r x r constraint G over a
// basis of size m.
//   basis_major:      row i*r + a  (basis index i, constraint index a)
//   constraint_major: row a*m + i, so block (a,b) is the scalar localizer
//                     of g_ab.
// The two are related by a permutation similarity.
enum class LocalizerLayout { basis_major, constraint_major };

inline PolyMatrix localizing_matrix_psd(const PolyMatrix& g, const MonomialBasis& basis,
                                        LocalizerLayout layout = LocalizerLayout::basis_major) {
  if (!g.is_symmetric()) throw invalid_input("localizing_matrix_psd: constraint matrix must be symmetric");
  if (basis.empty()) throw invalid_input("localizing_matrix_psd: basis must be non-empty");
  const int r = g.rows();
  const int m = static_cast<int>(basis.size());
  PolyMatrix out(r * m, r * m);
  auto row = [&](int i, int a) { return layout == LocalizerLayout::basis_major ? i * r + a : a * m + i; };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Monomial p = basis[static_cast<std::size_t>(i)] * basis[static_cast<std::size_t>(j)];
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) out(row(i, a), row(j, b)) = g(a, b) * p;
    }
  return out;
}

// One equality y(h * beta) = 0 per distinct product beta of two basis
// elements, in order of first appearance.
inline std::vector<LinearForm> localize_equality(const Polynomial& h, const MonomialBasis& basis) {
  std::vector<LinearForm> out;
  if (h.is_zero()) return out;
  std::unordered_set<Monomial, MonomialHash> seen;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i; j < basis.size(); ++j) {
      const Monomial beta = basis[i] * basis[j];
      if (seen.insert(beta).second) out.push_back(h * beta);
    }
  return out;
}

struct PsdBlock {
  std::string name;
  PolyMatrix cells;
};

// Moment SDP: minimize objective(y) over moments y with y(1) = 1, every
// block PSD and every equality form equal to zero.
struct SymbolicSDP {
  int nvars = 0;
  LinearForm objective;
  std::vector<PsdBlock> psd_blocks;
  std::vector<LinearForm> equalities;
  // Every moment appearing anywhere, sorted, starting with y(1).
  std::vector<MomentIndex> moments;

  // Index into `moments`, or -1.
  std::ptrdiff_t moment_index(const MomentIndex& m) const {
    const auto it = std::lower_bound(moments.begin(), moments.end(), m);
    return it != moments.end() && *it == m ? it - moments.begin() : -1;
  }

  // Recomputes the variable table from the objective, blocks and equalities.
  void register_moments() {
    std::vector<MomentIndex> all{Monomial()};
    auto add = [&all](const LinearForm& f) {
      for (const auto& t : f.terms()) all.push_back(t.first);
    };
    add(objective);
    for (const auto& b : psd_blocks)
      for (int i = 0; i < b.cells.rows(); ++i)
        for (int j = i; j < b.cells.cols(); ++j) add(b.cells(i, j));
    for (const auto& e : equalities) add(e);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    moments = std::move(all);
  }
};

struct Inequality {
  std::variant<Polynomial, PolyMatrix> g;
  MonomialBasis basis;
  std::string name;
};

struct Equality {
  Polynomial h;
  MonomialBasis basis;
};

inline SymbolicSDP assemble_relaxation(int nvars, const Polynomial& objective, const std::vector<Inequality>& ineqs,
                                       const std::vector<Equality>& eqs,
                                       const std::vector<MonomialBasis>& moment_bases) {
  if (nvars < 1) throw invalid_input("assemble_relaxation: nvars must be >= 1");
  int max_degree = 0;
  for (const auto& b : moment_bases) max_degree = std::max(max_degree, basis_degree(b));
  if (objective.degree() > 2 * max_degree) {
    throw invalid_input("assemble_relaxation: objective degree " + std::to_string(objective.degree()) +
                        " exceeds twice the largest moment-basis degree " + std::to_string(max_degree));
  }
  SymbolicSDP sdp;
  sdp.nvars = nvars;
  sdp.objective = objective;
  for (std::size_t k = 0; k < moment_bases.size(); ++k)
    sdp.psd_blocks.push_back({"moment " + std::to_string(k), moment_matrix(moment_bases[k])});
  for (const auto& c : ineqs) {
    if (const auto* p = std::get_if<Polynomial>(&c.g)) {
      sdp.psd_blocks.push_back({c.name, localizing_matrix_scalar(*p, c.basis)});
    } else {
      sdp.psd_blocks.push_back({c.name, localizing_matrix_psd(std::get<PolyMatrix>(c.g), c.basis)});
    }
  }
  for (const auto& e : eqs)
    for (auto& form : localize_equality(e.h, e.basis)) sdp.equalities.push_back(std::move(form));
  sdp.register_moments();
  for (const auto& m : sdp.moments)
    if (m.max_variable() >= nvars) throw invalid_input("assemble_relaxation: variable index exceeds nvars");
  return sdp;
}

// y_{a1,...,an}; the constant moment renders as "1".
inline std::string render_moment(const MomentIndex& m, int nvars) {
  if (m.is_one()) return "1";
  std::string out = "y_{";
  const auto alpha = m.exponents(nvars);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(alpha[i]);
  }
  return out + "}";
}

inline std::string format_coefficient(double c) {
  std::ostringstream os;
  os.precision(17);
  os << c;
  return os.str();
}

// Terms joined with '+' / '-'; unit coefficients are omitted.
inline std::string render(const LinearForm& f, int nvars) {
  if (f.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : f.terms()) {
    const double mag = std::abs(c);
    if (c < 0.0) {
      out += '-';
    } else if (!first) {
      out += '+';
    }
    first = false;
    if (m.is_one()) {
      out += format_coefficient(mag);
    } else {
      if (mag != 1.0) out += format_coefficient(mag) + '*';
      out += render_moment(m, nvars);
    }
  }
  return out;
}

// Rows of cells separated by " & ", one row per line.
inline std::string render(const PolyMatrix& m, int nvars) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += " & ";
      out += render(m(i, j), nvars);
    }
    out += '\n';
  }
  return out;
}

// Debug dump: variable table, objective, blocks, equalities.
inline std::string dump(const SymbolicSDP& sdp) {
  std::ostringstream os;
  os << "variables " << sdp.nvars << "\n";
  os << "moments " << sdp.moments.size() << "\n";
  for (std::size_t k = 0; k < sdp.moments.size(); ++k) os << "  m" << k << " = " << render_moment(sdp.moments[k], sdp.nvars) << "\n";
  os << "objective " << render(sdp.objective, sdp.nvars) << "\n";
  for (const auto& b : sdp.psd_blocks) {
    os << "block " << b.name << " " << b.cells.rows() << "x" << b.cells.cols() << "\n" << render(b.cells, sdp.nvars);
  }
  os << "equalities " << sdp.equalities.size() << "\n";
  for (const auto& e : sdp.equalities) os << "  " << render(e, sdp.nvars) << " = 0\n";
  return os.str();
}

}  // namespace aes

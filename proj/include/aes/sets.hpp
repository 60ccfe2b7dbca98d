#pragma once

// State-set constructions: the one-parameter absolutely entangled family and
// its threshold, the four-state candidate with the largest known set
// negativity, noisy mixtures, and two explicit "make everything product"
// unitaries.

#include "aes/core.hpp"
#include "aes/qstate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aes {

// Ordered list of states on a common bipartition. Exactly one of `pure` and
// `mixed` is populated.
struct StateSet {
  std::string label;
  Bipartition bp;
  std::vector<PureState> pure;
  std::vector<DensityMatrix> mixed;

  static StateSet from_pure(std::string label, Bipartition bp, std::vector<PureState> states) {
    if (states.empty()) throw invalid_input("state set must be non-empty");
    for (const auto& s : states) require_dim(s.dim(), bp, "state set");
    StateSet out;
    out.label = std::move(label);
    out.bp = bp;
    out.pure = std::move(states);
    return out;
  }

  static StateSet from_mixed(std::string label, Bipartition bp, std::vector<DensityMatrix> states) {
    if (states.empty()) throw invalid_input("state set must be non-empty");
    for (const auto& s : states) require_dim(s.dim(), bp, "state set");
    StateSet out;
    out.label = std::move(label);
    out.bp = bp;
    out.mixed = std::move(states);
    return out;
  }

  bool is_pure() const { return !pure.empty(); }
  std::size_t size() const { return is_pure() ? pure.size() : mixed.size(); }
  int dim() const { return bp.dim(); }

  // Density matrices, promoting pure states.
  std::vector<ComplexMatrix> densities() const {
    std::vector<ComplexMatrix> out;
    out.reserve(size());
    if (is_pure()) {
      for (const auto& s : pure) out.push_back(s.projector());
    } else {
      for (const auto& s : mixed) out.push_back(s.matrix());
    }
    return out;
  }
};

namespace detail {

inline ComplexVector unit(int dim, int index) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

// Orthonormalizes v against `basis` (two passes of modified Gram-Schmidt).
inline ComplexVector orthogonalize(ComplexVector v, const std::vector<ComplexVector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) v -= q.dot(v) * q;
  return v;
}

// Extends an orthonormal family to an orthonormal basis of C^dim using
// computational basis vectors.
inline std::vector<ComplexVector> complete_basis(std::vector<ComplexVector> family, int dim) {
  while (static_cast<int>(family.size()) < dim) {
    ComplexVector best;
    double best_norm = -1.0;
    for (int k = 0; k < dim; ++k) {
      ComplexVector w = orthogonalize(unit(dim, k), family);
      const double n = w.norm();
      if (n > best_norm) {
        best_norm = n;
        best = std::move(w);
      }
    }
    family.push_back(best / best_norm);
  }
  return family;
}

inline ComplexMatrix map_bases(const std::vector<ComplexVector>& sources,
                               const std::vector<ComplexVector>& targets, int dim) {
  const auto src = complete_basis(sources, dim);
  const auto dst = complete_basis(targets, dim);
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) u += dst[k] * src[k].adjoint();
  return u;
}

}  // namespace detail

// K = d1 + d2 states: |phi_1> = |xi_1>, |phi_k> = c|xi_1> + sqrt(1-c^2)|xi_k>
// over the computational basis.
inline StateSet one_param_set(const Bipartition& bp, double c) {
  if (!(c > 0.0 && c < 1.0)) throw invalid_input("one_param_set: c must lie in (0,1)");
  const int d = bp.dim();
  const int k_states = bp.d1 + bp.d2;
  const double s = std::sqrt(1.0 - c * c);
  std::vector<PureState> states;
  states.push_back(PureState::basis(d, 0));
  for (int k = 1; k < k_states; ++k) {
    ComplexVector v = ComplexVector::Zero(d);
    v(0) = c;
    v(k) = s;
    states.push_back(PureState::normalized(v));
  }
  return StateSet::from_pure("one-param:" + std::to_string(bp.d1) + "x" + std::to_string(bp.d2) +
                                 ":" + std::to_string(c),
                             bp, std::move(states));
}

// The one-parameter family is absolutely entangled for c strictly above this.
inline double threshold_amplitude(const Bipartition& bp) {
  const double d1 = bp.d1, d2 = bp.d2;
  return std::sqrt((d1 - 1.0) * (d2 - 1.0) / (d1 * d2));
}

struct CandidateCoefficients {
  double a, b, c;
};

inline CandidateCoefficients candidate_max_coefficients(double a = 0.6245) {
  const double b = std::sqrt(-3.0 * a * a + a - 2.0 * (1.0 - a) * std::sqrt(3.0 * a + 1.0) + 2.0) / 3.0;
  const double c = std::sqrt(1.0 - a * a - 2.0 * b * b);
  return {a, b, c};
}

// Four states in C^2 (x) C^2 with the largest set negativity found so far.
inline StateSet candidate_max_set() {
  const auto [a, b, c] = candidate_max_coefficients();
  auto make = [](double x0, double x1, double x2, double x3) {
    ComplexVector v(4);
    v << x0, x1, x2, x3;
    return PureState(v);
  };
  std::vector<PureState> states{make(1, 0, 0, 0), make(a, b, b, c), make(a, b, c, b), make(a, c, b, b)};
  return StateSet::from_pure("set2", Bipartition(2, 2), std::move(states));
}

// Replaces each state by v rho + (1 - v) I / d.
inline StateSet add_white_noise(const StateSet& s, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw invalid_input("add_white_noise: visibility must lie in [0,1]");
  const int d = s.dim();
  const ComplexMatrix noise = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  std::vector<DensityMatrix> out;
  for (const auto& rho : s.densities()) out.emplace_back(v * rho + (1.0 - v) * noise);
  return StateSet::from_mixed(s.label + "@v=" + std::to_string(v), s.bp, std::move(out));
}

inline ComplexMatrix cnot_matrix() {
  ComplexMatrix u = ComplexMatrix::Zero(4, 4);
  u(0, 0) = 1.0;
  u(1, 1) = 1.0;
  u(3, 2) = 1.0;
  u(2, 3) = 1.0;
  return u;
}

// Computational basis plus the four Bell states, and the CNOT that makes all
// eight product.
inline std::pair<StateSet, ComplexMatrix> warmup_set() {
  const double r = 1.0 / std::sqrt(2.0);
  auto make = [](double x0, double x1, double x2, double x3) {
    ComplexVector v(4);
    v << x0, x1, x2, x3;
    return PureState::normalized(v);
  };
  std::vector<PureState> states{make(1, 0, 0, 0), make(0, 1, 0, 0), make(0, 0, 1, 0), make(0, 0, 0, 1),
                                make(r, 0, 0, r), make(r, 0, 0, -r), make(0, r, r, 0), make(0, r, -r, 0)};
  return {StateSet::from_pure("warmup", Bipartition(2, 2), std::move(states)), cnot_matrix()};
}

// Unitary that maps up to max(d1,d2)+1 pure states to product states.
//
// The first d' = max(d1,d2) states are embedded into span{|i>|0>} (or
// span{|0>|i>} when d2 > d1) by Gram-Schmidt, so their coordinates are fixed
// by the Gram matrix. The component of the next state orthogonal to that span
// is sent to |v>|1>, where |v>|0> is the image of its in-span component, which
// leaves it equal to |v>(|0> + t|1>).
inline ComplexMatrix productizing_basis(const std::vector<PureState>& states, const Bipartition& bp) {
  constexpr double kPivot = 1e-10;
  const int d = bp.dim();
  const int dprime = bp.larger();
  const bool first_is_large = bp.d1 >= bp.d2;
  if (static_cast<int>(states.size()) > dprime + 1) {
    throw invalid_input("productizing_basis: at most max(d1,d2)+1 states can always be made product");
  }
  for (const auto& s : states) require_dim(s.dim(), bp, "productizing_basis");

  auto slot = [&](int i, int j) { return first_is_large ? bp.flat(i, j) : bp.flat(j, i); };

  std::vector<ComplexVector> sources;
  std::vector<ComplexVector> targets;
  const int head = std::min<int>(static_cast<int>(states.size()), dprime);
  for (int j = 0; j < head; ++j) {
    ComplexVector w = detail::orthogonalize(states[j].amplitudes(), sources);
    const double n = w.norm();
    if (n <= kPivot) continue;  // dependent: already represented by earlier vectors
    targets.push_back(detail::unit(d, slot(static_cast<int>(sources.size()), 0)));
    sources.push_back(w / n);
  }

  if (static_cast<int>(states.size()) == dprime + 1) {
    const ComplexVector& psi = states.back().amplitudes();
    ComplexVector local = ComplexVector::Zero(dprime);
    for (std::size_t i = 0; i < sources.size(); ++i) local(static_cast<Eigen::Index>(i)) = sources[i].dot(psi);
    ComplexVector w = detail::orthogonalize(psi, sources);
    const double n = w.norm();
    if (n > kPivot) {
      ComplexVector target = ComplexVector::Zero(d);
      const double ln = local.norm();
      if (ln > kPivot) {
        for (int i = 0; i < dprime; ++i) target(slot(i, 1)) = local(i) / ln;
      } else {
        target(slot(0, 1)) = 1.0;
      }
      sources.push_back(w / n);
      targets.push_back(target);
    }
  }
  return detail::map_bases(sources, targets, d);
}

struct AppendixBResult {
  StateSet states;
  ComplexMatrix unitary;
};

// Four-state family with |c21| = c21 <= 1/2 and |c31| = |c41| = 1/(2 c21 + 1),
// together with a unitary sending |xi_1> to |00> under which all four states
// are product.
inline AppendixBResult separability_unitary_appB(double c21) {
  if (!(c21 > 0.0 && c21 <= 0.5)) throw invalid_input("separability_unitary_appB: c21 must lie in (0, 0.5]");
  const double c_other = 1.0 / (2.0 * c21 + 1.0);
  const double c1[3] = {c21, c_other, c_other};
  double cd[3];
  // Row r holds the moduli of U|xi_{r+2}> on |01>, |10>, |11>.
  Eigen::Matrix3cd ub;
  for (int r = 0; r < 3; ++r) {
    cd[r] = std::sqrt(1.0 - c1[r] * c1[r]);
    const double b4 = std::sqrt(2.0 / (c1[r] + 1.0) - 1.0);
    const double b23 = std::sqrt(0.5 * (1.0 - b4 * b4));
    ub.row(r) << b23, b23, b4;
  }

  // Make rows 1 and 2 orthogonal: the three products p_m = |b_1m b_2m| must
  // close a triangle p_0 + p_1 e^{i phi_1} + p_2 e^{i phi_2} = 0.
  const double p0 = ub(1, 0).real() * ub(2, 0).real();
  const double p1 = ub(1, 1).real() * ub(2, 1).real();
  const double p2 = ub(1, 2).real() * ub(2, 2).real();
  const double cos_phi1 = std::clamp((p2 * p2 - p0 * p0 - p1 * p1) / (2.0 * p0 * p1), -1.0, 1.0);
  const complex e1 = std::polar(1.0, std::acos(cos_phi1));
  const complex z2 = -(p0 + p1 * e1);
  const complex e2 = z2 / std::abs(z2);
  // b_1m conj(b_2m) = p_m e^{i phi_m} with row 1 real.
  ub(2, 1) *= std::conj(e1);
  ub(2, 2) *= std::conj(e2);

  // Row 0 is the orthogonal complement conj(row1 x row2). Eigen's complex
  // cross product already conjugates.
  const Eigen::Vector3cd r1 = ub.row(1).transpose();
  const Eigen::Vector3cd r2 = ub.row(2).transpose();
  ub.row(0) = r1.cross(r2).transpose();

  // Row phases restore c_i1 b_i4 = c_ii b_i2 b_i3.
  for (int r = 0; r < 3; ++r) {
    complex delta = c1[r] * ub(r, 2) / (cd[r] * ub(r, 0) * ub(r, 1));
    delta /= std::abs(delta);
    ub.row(r) *= delta;
  }

  ComplexMatrix u = ComplexMatrix::Zero(4, 4);
  u(0, 0) = 1.0;
  for (int r = 0; r < 3; ++r)
    for (int j = 0; j < 3; ++j) u(j + 1, r + 1) = ub(r, j);

  std::vector<PureState> states;
  states.push_back(PureState::basis(4, 0));
  for (int r = 0; r < 3; ++r) {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = c1[r];
    v(r + 1) = cd[r];
    states.push_back(PureState::normalized(v));
  }
  return {StateSet::from_pure("appb:" + std::to_string(c21), Bipartition(2, 2), std::move(states)), u};
}

namespace detail {

inline double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw invalid_input("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

inline int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw invalid_input("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

inline Bipartition parse_bipartition(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) throw invalid_input("bipartition must look like <d1>x<d2>");
  return Bipartition(parse_int(text.substr(0, x), "d1"), parse_int(text.substr(x + 1), "d2"));
}

}  // namespace detail

// Built-in sets by label: "one-param:<d1>x<d2>:<c>", "set2", "warmup",
// "appb:<c21>".
inline StateSet named_set(std::string_view label) {
  if (label == "set2") return candidate_max_set();
  if (label == "warmup") return warmup_set().first;
  if (label.starts_with("one-param:")) {
    const auto rest = label.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw invalid_input("one-param label needs a value: one-param:<d1>x<d2>:<c>");
    return one_param_set(detail::parse_bipartition(rest.substr(0, colon)),
                         detail::parse_double(rest.substr(colon + 1), "c"));
  }
  if (label.starts_with("appb:")) return separability_unitary_appB(detail::parse_double(label.substr(5), "c21")).states;
  throw invalid_input("unknown set label '" + std::string(label) + "'");
}

}  // namespace aes

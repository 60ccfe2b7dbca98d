#pragma once

// Upper bounds on the absolute set entanglement: minimize sum_k E(U rho_k U^dag)
// over U = exp(iH), H Hermitian, by multi-start quasi-Newton descent with
// finite-difference gradients.

#include "aes/core.hpp"
#include "aes/parallel.hpp"
#include "aes/qstate.hpp"
#include "aes/sets.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace aes {

enum class Measure { negativity, entropy };

inline std::string to_string(Measure m) { return m == Measure::negativity ? "negativity" : "entropy"; }

inline Measure parse_measure(const std::string& name) {
  if (name == "negativity") return Measure::negativity;
  if (name == "entropy") return Measure::entropy;
  throw invalid_input("unknown measure '" + name + "' (expected negativity or entropy)");
}

// Coefficients of a Hermitian generator; length d^2.
using UnitaryParams = std::vector<double>;

struct MinimizationResult {
  double value = 0.0;
  UnitaryParams theta_opt;
  std::vector<double> per_state;
  int starts = 0;
  bool converged = false;
};

struct MinimizeOptions {
  int starts = 20;
  int max_iter = 2000;
  double grad_eps = 1e-6;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  int jobs = 1;
  // Polishing rounds from each local minimum. A round descends on the sum of
  // squared per-state values (smooth where a measure has a kink at zero) and
  // then on the objective itself with a 100x smaller difference step; a
  // round's result is kept only if it lowers the objective.
  int refine = 2;
};

// Generalized Gell-Mann matrices plus the identity, normalized to
// Tr(G_a G_b) = 2 delta_ab. Order: symmetric (j<k), antisymmetric (j<k),
// diagonal l = 1..d-1, identity.
inline std::vector<ComplexMatrix> gell_mann_basis(int d) {
  if (d < 1) throw invalid_input("gell_mann_basis: dimension must be positive");
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      ComplexMatrix g = ComplexMatrix::Zero(d, d);
      g(j, k) = 1.0;
      g(k, j) = 1.0;
      out.push_back(g);
    }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      ComplexMatrix g = ComplexMatrix::Zero(d, d);
      g(j, k) = complex(0.0, -1.0);
      g(k, j) = complex(0.0, 1.0);
      out.push_back(g);
    }
  for (int l = 1; l < d; ++l) {
    ComplexMatrix g = ComplexMatrix::Zero(d, d);
    const double scale = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) g(j, j) = scale;
    g(l, l) = -l * scale;
    out.push_back(g);
  }
  out.push_back(ComplexMatrix::Identity(d, d) * std::sqrt(2.0 / d));
  return out;
}

// H = sum_a theta_a G_a, assembled entrywise in the gell_mann_basis order.
inline ComplexMatrix hermitian_from_params(const UnitaryParams& theta, int d) {
  if (d < 1 || theta.size() != static_cast<std::size_t>(d) * d) {
    throw invalid_input("unitary parameters: expected " + std::to_string(d * d) + " entries, got " +
                        std::to_string(theta.size()));
  }
  for (const double t : theta)
    if (!std::isfinite(t)) throw invalid_input("unitary parameters must be finite");
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  std::size_t a = 0;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k, ++a) {
      h(j, k) += theta[a];
      h(k, j) += theta[a];
    }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k, ++a) {
      h(j, k) += complex(0.0, -theta[a]);
      h(k, j) += complex(0.0, theta[a]);
    }
  for (int l = 1; l < d; ++l, ++a) {
    const double scale = theta[a] * std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) h(j, j) += scale;
    h(l, l) -= l * scale;
  }
  const double id = theta[a] * std::sqrt(2.0 / d);
  for (int j = 0; j < d; ++j) h(j, j) += id;
  return h;
}

// U = exp(iH) through the eigendecomposition of H.
inline ComplexMatrix unitary_from_params(const UnitaryParams& theta, int d) {
  const ComplexMatrix h = hermitian_from_params(theta, d);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const ComplexMatrix& v = es.eigenvectors();
  ComplexVector phases(d);
  for (int i = 0; i < d; ++i) phases(i) = std::polar(1.0, es.eigenvalues()(i));
  return v * phases.asDiagonal() * v.adjoint();
}

// Evaluates the per-state entanglement of a set after a global unitary.
class SetObjective {
 public:
  SetObjective(const StateSet& s, Measure m) : bp_(s.bp), measure_(m), pure_(s.is_pure()) {
    if (m == Measure::entropy && !pure_) {
      throw invalid_input("entropy of entanglement is only defined here for pure-state sets");
    }
    if (pure_) {
      for (const auto& psi : s.pure) vectors_.push_back(psi.amplitudes());
    } else {
      for (const auto& rho : s.mixed) matrices_.push_back(rho.matrix());
    }
  }

  int dim() const { return bp_.dim(); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(dim()) * dim(); }
  std::size_t size() const { return pure_ ? vectors_.size() : matrices_.size(); }

  std::vector<double> per_state(const ComplexMatrix& u) const {
    std::vector<double> out;
    out.reserve(size());
    if (pure_) {
      for (const auto& v : vectors_) {
        const ComplexVector w = u * v;
        out.push_back(measure_ == Measure::negativity ? detail::pure_negativity(w, bp_) : detail::pure_entropy(w, bp_));
      }
    } else {
      for (const auto& rho : matrices_) {
        const ComplexMatrix moved = u * rho * u.adjoint();
        out.push_back(detail::negativity_unchecked(moved, bp_));
      }
    }
    return out;
  }

  std::vector<double> per_state(const UnitaryParams& theta) const { return per_state(unitary_from_params(theta, dim())); }

  double operator()(const UnitaryParams& theta) const {
    double total = 0.0;
    for (const double e : per_state(theta)) total += e;
    return total;
  }

 private:
  Bipartition bp_;
  Measure measure_;
  bool pure_;
  std::vector<ComplexVector> vectors_;
  std::vector<ComplexMatrix> matrices_;
};

inline double set_objective(const StateSet& s, Measure m, const UnitaryParams& theta) {
  return SetObjective(s, m)(theta);
}

namespace detail {

struct LocalMinimum {
  UnitaryParams x;
  double f = 0.0;
  bool converged = false;
};

using Objective = std::function<double(const UnitaryParams&)>;

inline RealVector central_gradient(const Objective& f, UnitaryParams& x, double h) {
  RealVector g(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double up = f(x);
    x[i] = xi - h;
    const double down = f(x);
    x[i] = xi;
    g(static_cast<Eigen::Index>(i)) = (up - down) / (2.0 * h);
  }
  return g;
}

inline UnitaryParams step(const UnitaryParams& x, const RealVector& p, double alpha) {
  UnitaryParams out(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * p(static_cast<Eigen::Index>(i));
  return out;
}

// Axis-aligned probing, used when the line search cannot make progress along
// the quasi-Newton direction. Returns true if any probe decreased f.
inline bool coordinate_descent(const Objective& f, UnitaryParams& x, double& fx, double smallest) {
  bool improved = false;
  for (double h = 1e-2; h >= smallest; h *= 0.1) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (const double sign : {1.0, -1.0}) {
        const double xi = x[i];
        x[i] = xi + sign * h;
        const double trial = f(x);
        if (trial < fx) {
          fx = trial;
          improved = true;
          break;
        }
        x[i] = xi;
      }
    }
    if (improved) return true;
  }
  return false;
}

// BFGS on the inverse Hessian with Armijo backtracking.
inline LocalMinimum bfgs(const Objective& f, UnitaryParams x, const MinimizeOptions& opts) {
  const auto n = static_cast<Eigen::Index>(x.size());
  double fx = f(x);
  RealVector g = central_gradient(f, x, opts.grad_eps);
  RealMatrix hinv = RealMatrix::Identity(n, n);
  bool fresh = true;
  int stalled = 0;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.tol) return {x, fx, true};
    RealVector p = -hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
      fresh = true;
    }
    double alpha = 1.0;
    UnitaryParams trial;
    double ft = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      trial = step(x, p, alpha);
      ft = f(trial);
      if (ft <= fx + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted || ft >= fx) {
      if (!fresh) {
        hinv.setIdentity();
        fresh = true;
        continue;
      }
      if (!coordinate_descent(f, x, fx, opts.grad_eps)) return {x, fx, true};
      g = central_gradient(f, x, opts.grad_eps);
      hinv.setIdentity();
      continue;
    }
    const RealVector gt = central_gradient(f, trial, opts.grad_eps);
    const RealVector s = alpha * p;
    const RealVector y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) hinv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const RealVector hy = hinv * y;
      hinv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
      fresh = false;
    }
    // Progress below the rounding level of f counts as a stall.
    stalled = (fx - ft <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx))) ? stalled + 1 : 0;
    x = std::move(trial);
    fx = ft;
    g = gt;
    if (stalled >= 20) return {x, fx, true};
  }
  return {x, fx, false};
}

}  // namespace detail

// First start at theta = 0, the rest uniform in [-pi, pi]^{d^2}. Start i is
// the same for any total number of starts with the same seed.
inline std::vector<UnitaryParams> initial_points(std::size_t count, int starts, std::uint64_t seed) {
  std::vector<UnitaryParams> out;
  out.reserve(static_cast<std::size_t>(starts));
  out.emplace_back(count, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int s = 1; s < starts; ++s) {
    UnitaryParams x(count);
    for (auto& v : x) v = angle(rng);
    out.push_back(std::move(x));
  }
  return out;
}

// Best local minimum over all starts (ties go to the earlier start).
// converged reports whether the winning run stopped on its own criteria
// rather than on max_iter.
inline MinimizationResult minimize_set_entanglement(const StateSet& s, Measure m, const MinimizeOptions& opts = {}) {
  if (opts.starts < 1) throw invalid_input("minimize: starts must be >= 1");
  if (opts.max_iter < 0) throw invalid_input("minimize: max_iter must be >= 0");
  if (!(opts.grad_eps > 0.0)) throw invalid_input("minimize: grad_eps must be positive");
  if (opts.refine < 0) throw invalid_input("minimize: refine must be >= 0");
  const SetObjective objective(s, m);
  const detail::Objective f = [&objective](const UnitaryParams& x) { return objective(x); };
  const detail::Objective squares = [&objective](const UnitaryParams& x) {
    double total = 0.0;
    for (const double e : objective.per_state(x)) total += e * e;
    return total;
  };
  const auto x0 = initial_points(objective.parameter_count(), opts.starts, opts.seed);
  std::vector<detail::LocalMinimum> runs(x0.size());
  parallel_for(x0.size(), opts.jobs, [&](std::size_t i) {
    runs[i] = detail::bfgs(f, x0[i], opts);
    MinimizeOptions fine = opts;
    for (int level = 0; level < opts.refine; ++level) {
      bool improved = false;
      fine.grad_eps *= 1e-2;
      for (const auto* objective_used : {&squares, &f}) {
        detail::LocalMinimum next = detail::bfgs(*objective_used, runs[i].x, objective_used == &f ? fine : opts);
        next.f = f(next.x);
        if (next.f < runs[i].f) {
          next.converged = runs[i].converged;
          runs[i] = std::move(next);
          improved = true;
        }
      }
      if (!improved) break;
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].f < runs[best].f) best = i;

  MinimizationResult out;
  out.theta_opt = runs[best].x;
  out.per_state = objective.per_state(out.theta_opt);
  out.value = 0.0;
  for (const double e : out.per_state) out.value += e;
  out.starts = opts.starts;
  out.converged = runs[best].converged;
  return out;
}

// A one-parameter family of state sets sampled on a grid.
struct FamilyParams {
  std::string name;
  std::function<StateSet(double)> make;
  std::vector<double> grid;
};

inline FamilyParams one_param_family(const Bipartition& bp, std::vector<double> grid) {
  return {"one-param:" + std::to_string(bp.d1) + "x" + std::to_string(bp.d2),
          [bp](double c) { return one_param_set(bp, c); }, std::move(grid)};
}

inline FamilyParams noise_family(const StateSet& base, std::vector<double> grid) {
  return {base.label + "+noise", [base](double v) { return add_white_noise(base, v); }, std::move(grid)};
}

inline FamilyParams appb_family(std::vector<double> grid) {
  return {"appb", [](double c21) { return separability_unitary_appB(c21).states; }, std::move(grid)};
}

struct SweepRow {
  double param = 0.0;
  MinimizationResult result;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

// One independent minimization per grid point. Rows run concurrently when
// opts.jobs > 1; each row itself is single-threaded.
inline std::vector<SweepRow> sweep(const FamilyParams& family, Measure m, const MinimizeOptions& opts = {}) {
  if (family.grid.empty()) throw invalid_input("sweep: grid must be non-empty");
  std::vector<SweepRow> rows(family.grid.size());
  MinimizeOptions row_opts = opts;
  row_opts.jobs = 1;
  parallel_for(rows.size(), opts.jobs, [&](std::size_t i) {
    rows[i].param = family.grid[i];
    try {
      rows[i].result = minimize_set_entanglement(family.make(family.grid[i]), m, row_opts);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

}  // namespace aes

// Brackets the minimal set negativity of the four-state candidate set: the
// heuristic optimum gives an upper bound, the fixed-unitary SDP at that
// optimum reproduces it, and the fast relaxation gives a certified lower
// bound.

#include "aes/aesbound.hpp"
#include "aes/heuristic.hpp"
#include "aes/parallel.hpp"

#include <cstdio>

int main() {
  const aes::StateSet s = aes::candidate_max_set();
  aes::MinimizeOptions opts;
  opts.starts = 20;
  opts.seed = 0;
  opts.jobs = aes::default_jobs();
  const auto heur = aes::minimize_set_entanglement(s, aes::Measure::negativity, opts);
  const aes::ComplexMatrix u = aes::unitary_from_params(heur.theta_opt, s.dim());

  const aes::NumericSDP fixed = aes::lower_numeric(aes::build_fixed_unitary_program(s, u));
  const aes::SDPSolution sol = aes::solve(fixed);
  const aes::BoundResult lower = aes::lower_bound_negativity(s, aes::RelaxationConfig::fast());

  std::printf("heuristic upper bound          %.8f\n", heur.value);
  std::printf("fixed-unitary SDP at optimum   %.8f (%s)\n", sol.primal_value, aes::to_string(sol.status).c_str());
  std::printf("fast relaxation lower bound    %.8f (%s)\n", lower.bound,
              lower.certified() ? "certified" : "not certified");
  std::printf("entropy bracket                [%.8f, ", aes::entropy_lower_bound(lower.bound, 4));
  std::printf("%.8f]\n", aes::minimize_set_entanglement(s, aes::Measure::entropy, opts).value);
  return lower.certified() ? 0 : 1;
}

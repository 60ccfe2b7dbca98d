#include "aes/aesbound.hpp"
#include "aes/heuristic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <set>

namespace aes {
namespace {

StateSet bell_set() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0;
  return StateSet::from_pure("bell", Bipartition(2, 2), {PureState::normalized(v)});
}

StateSet random_mixed_set(std::mt19937_64& rng, int k) {
  std::vector<DensityMatrix> states;
  for (int i = 0; i < k; ++i) states.emplace_back(testing::random_density(rng, 4));
  return StateSet::from_mixed("random", Bipartition(2, 2), std::move(states));
}

TEST(Layout, SlotCountsAndNames) {
  const VariableLayout lay(4, 4);
  EXPECT_EQ(lay.total(), 160);
  EXPECT_EQ(lay.u_count(), 32);
  EXPECT_EQ(lay.name(0), "Re u[0][0]");
  EXPECT_EQ(lay.name(31), "Im u[3][3]");
  EXPECT_EQ(lay.name(32), "s+_0[0][0]");
  EXPECT_EQ(lay.name(lay.xi_re(0, Sign::plus, 0, 1)), "Re s+_0[0][1]");
  EXPECT_EQ(lay.name(lay.xi_im(3, Sign::minus, 2, 3)), "Im s-_3[2][3]");
  std::set<int> slots;
  for (int k = 0; k < 4; ++k)
    for (const Sign s : {Sign::plus, Sign::minus})
      for (int i = 0; i < 4; ++i) {
        slots.insert(lay.xi_diag(k, s, i));
        for (int j = i + 1; j < 4; ++j) {
          slots.insert(lay.xi_re(k, s, i, j));
          slots.insert(lay.xi_im(k, s, i, j));
        }
      }
  EXPECT_EQ(slots.size(), 128u);
  EXPECT_EQ(*slots.begin(), 32);
  EXPECT_EQ(*slots.rbegin(), 159);
}

TEST(Config, RejectsVacuousUnitarity) {
  RelaxationConfig cfg = RelaxationConfig::fast();
  cfg.eq_deg = 0;
  EXPECT_THROW(build_negativity_relaxation(candidate_max_set(), cfg), invalid_input);
  cfg = RelaxationConfig::fast();
  cfg.moment_deg_u = -1;
  EXPECT_THROW(build_negativity_relaxation(candidate_max_set(), cfg), invalid_input);
}

TEST(Entropy, LowerBoundValues) {
  EXPECT_NEAR(entropy_lower_bound(0.0, 4), 0.0, 1e-12);
  EXPECT_NEAR(entropy_lower_bound(0.5, 1), 1.0, 1e-12);
  // 30-digit evaluations of K h((1 + sqrt(1 - 4 (N/K)^2)) / 2).
  EXPECT_NEAR(entropy_lower_bound(0.2213, 4), 0.120206352609825069, 1e-12);
  EXPECT_NEAR(entropy_lower_bound(0.25, 1), 0.354578902665269884, 1e-12);
  EXPECT_NEAR(entropy_lower_bound(0.2, 2), 0.162937830028708425, 1e-12);
  EXPECT_THROW(entropy_lower_bound(2.1, 4), invalid_input);
  EXPECT_THROW(entropy_lower_bound(-0.1, 4), invalid_input);
  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    const double v = entropy_lower_bound(0.1 * i, 4);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

// The full configuration on set2 is assembled once and shared.
class FullRelaxation : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    sdp_ = std::make_unique<SymbolicSDP>(build_negativity_relaxation(candidate_max_set(), RelaxationConfig::full()));
  }
  static void TearDownTestSuite() { sdp_.reset(); }
  static std::unique_ptr<SymbolicSDP> sdp_;
};
std::unique_ptr<SymbolicSDP> FullRelaxation::sdp_;

TEST_F(FullRelaxation, Dimensions) {
  EXPECT_EQ(sdp_->nvars, 160);
  ASSERT_FALSE(sdp_->psd_blocks.empty());
  EXPECT_EQ(sdp_->psd_blocks.front().name, "moment u");
  EXPECT_EQ(sdp_->psd_blocks.front().cells.rows(), 561);
  // u block, 8 part moment blocks, 8 PPT localizers of size 8 * 33.
  ASSERT_EQ(sdp_->psd_blocks.size(), 17u);
  for (std::size_t b = 1; b < 9; ++b) EXPECT_EQ(sdp_->psd_blocks[b].cells.rows(), 153);
  for (std::size_t b = 9; b < 17; ++b) EXPECT_EQ(sdp_->psd_blocks[b].cells.rows(), 264);
  EXPECT_EQ(sdp_->objective.degree(), 1);
}

TEST_F(FullRelaxation, DiracMomentsOfAnExactSplitAreFeasible) {
  const StateSet s = candidate_max_set();
  const NumericSDP p = lower_numeric(*sdp_);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2; ++trial) {
    const ComplexMatrix u = testing::random_unitary(rng, 4);
    const RealVector x = feasible_point(s, u);
    SDPSolution sol;
    sol.y = dirac_moments(*sdp_, x);
    const CertificateReport rep = check_certificate(p, sol, 1e-9);
    EXPECT_GE(rep.min_eig, -1e-9);
    EXPECT_LE(rep.equality_residual, 1e-9);
    double neg = 0.0;
    for (const auto& rho : s.densities()) neg += negativity(ComplexMatrix(u * rho * u.adjoint()), s.bp);
    EXPECT_NEAR(rep.objective, neg, 1e-9);
  }
}

TEST_F(FullRelaxation, PresolveKeepsTheFeasibleSet) {
  const NumericSDP p = lower_numeric(*sdp_);
  const Presolved pre = presolve_free_rows(p);
  EXPECT_LT(pre.problem.nvars, p.nvars);
  EXPECT_LT(pre.problem.equalities.size(), p.equalities.size());
  EXPECT_EQ(pre.problem.blocks.size(), p.blocks.size());
  std::mt19937_64 rng(12);
  const RealVector y = dirac_moments(*sdp_, feasible_point(candidate_max_set(), testing::random_unitary(rng, 4)));
  SDPSolution sol;
  sol.y = RealVector(pre.problem.nvars);
  for (int k = 0; k < pre.problem.nvars; ++k) sol.y(k) = y(pre.kept[static_cast<std::size_t>(k)]);
  const CertificateReport rep = check_certificate(pre.problem, sol, 1e-9);
  EXPECT_GE(rep.min_eig, -1e-9);
  EXPECT_LE(rep.equality_residual, 1e-9);
}

TEST(Presolve, DropsRowsOnlyThroughPrivateVariables) {
  NumericSDP p;
  p.nvars = 4;
  p.c = RealVector::Zero(4);
  p.c(0) = 1.0;
  p.blocks.push_back({1, false, {{0, 0, 0, 1.0}, {-1, 0, 0, -1.0}}});
  p.equalities.push_back({{{0, 1.0}, {1, 2.0}}, 3.0});  // y1 only here: droppable
  p.equalities.push_back({{{0, 1.0}, {2, 1.0}, {3, 1.0}}, 1.0});
  p.equalities.push_back({{{2, 1.0}, {3, 1.0}}, 0.0});  // y2, y3 shared: both rows stay
  const Presolved pre = presolve_free_rows(p);
  EXPECT_EQ(pre.problem.equalities.size(), 2u);
  EXPECT_EQ(pre.kept, (std::vector<int>{0, 2, 3}));
  const SDPSolution sol = solve(pre.problem);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.primal_value, 1.0, 1e-7);
}

TEST(FixedUnitary, EqualsNegativityOfTheRotatedStates) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const StateSet s = random_mixed_set(rng, 2);
    const ComplexMatrix u = testing::random_unitary(rng, 4);
    const NumericSDP p = lower_numeric(build_fixed_unitary_program(s, u));
    const SDPSolution sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
    double neg = 0.0;
    for (const auto& rho : s.densities()) neg += negativity(ComplexMatrix(u * rho * u.adjoint()), s.bp);
    EXPECT_NEAR(sol.primal_value, neg, 1e-6);
    EXPECT_TRUE(check_certificate(p, sol).pass);
  }
  const StateSet bell = bell_set();
  const SDPSolution sol = solve(lower_numeric(build_fixed_unitary_program(bell, ComplexMatrix::Identity(4, 4))));
  EXPECT_NEAR(sol.primal_value, 0.5, 1e-7);
}

// Requiring the parts themselves to be positive excludes the optimal split
// of an entangled state: the program value rises above its negativity.
TEST(FixedUnitary, PositivePartsOverestimate) {
  const StateSet bell = bell_set();
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  const SDPSolution sol = solve(lower_numeric(build_fixed_unitary_program(bell, id, true)));
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
  EXPECT_GT(sol.primal_value, 0.5 + 1e-3);

  RelaxationConfig cfg = RelaxationConfig::fast();
  cfg.include_sigma_psd = true;
  const SymbolicSDP sdp = build_negativity_relaxation(bell, cfg);
  SDPSolution point;
  point.y = dirac_moments(sdp, feasible_point(bell, id));
  const CertificateReport rep = check_certificate(lower_numeric(sdp), point, 1e-9);
  EXPECT_LT(rep.min_eig, -0.1);
}

TEST(FastBound, CandidateSetIsCertifiedAndSandwiched) {
  const StateSet s = candidate_max_set();
  const BoundResult r = lower_bound_negativity(s, RelaxationConfig::fast());
  ASSERT_TRUE(r.certified()) << r.message << " " << r.certificate.summary();
  EXPECT_GE(r.bound, 0.0);
  EXPECT_GE(r.dual_objective, -1e-7);
  MinimizeOptions opts;
  opts.starts = 4;
  const double upper = minimize_set_entanglement(s, Measure::negativity, opts).value;
  EXPECT_LE(r.bound, upper + 1e-6);
  EXPECT_LE(entropy_lower_bound(r.bound, 4),
            minimize_set_entanglement(s, Measure::entropy, opts).value + 1e-6);
}

TEST(FastBound, RaisingMomentDegreesNeverLowersTheBound) {
  const StateSet s = one_param_set(Bipartition(2, 2), 0.9);
  RelaxationConfig cfg = RelaxationConfig::fast();
  cfg.moment_deg_u = 0;
  cfg.moment_deg_xi = 0;
  double prev = -1.0;
  for (int step = 0; step < 3; ++step) {
    if (step == 1) cfg.moment_deg_xi = 1;
    if (step == 2) cfg.moment_deg_u = 1;
    const BoundResult r = lower_bound_negativity(s, cfg);
    ASSERT_TRUE(r.certified()) << r.message << " " << r.certificate.summary();
    EXPECT_GE(r.dual_objective, prev - 1e-8);
    EXPECT_GE(r.bound, 0.0);
    prev = r.dual_objective;
  }
}

TEST(FastBound, WarmupSetIsZero) {
  const BoundResult r = lower_bound_negativity(warmup_set().first, RelaxationConfig::fast());
  ASSERT_TRUE(r.certified()) << r.message << " " << r.certificate.summary();
  EXPECT_EQ(r.bound, std::max(r.dual_objective, 0.0));
  EXPECT_LE(r.bound, 1e-6);
}

}  // namespace
}  // namespace aes

#include "aes/heuristic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace aes;

namespace {

const Bipartition kQubits(2, 2);

UnitaryParams random_params(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  UnitaryParams theta(static_cast<std::size_t>(d) * d);
  for (auto& t : theta) t = u(rng);
  return theta;
}

MinimizeOptions quick(int starts) {
  MinimizeOptions o;
  o.starts = starts;
  return o;
}

// Summed negativity through the partial-transpose route, independent of the
// Schmidt shortcut the objective uses for pure states.
double negativity_via_pt(const StateSet& s, const ComplexMatrix& u) {
  double total = 0.0;
  for (const auto& rho : s.densities()) total += negativity(ComplexMatrix(u * rho * u.adjoint()), s.bp);
  return total;
}

}  // namespace

TEST(GellMann, OrthogonalHermitianAndComplete) {
  for (const int d : {2, 3, 4}) {
    const auto basis = gell_mann_basis(d);
    ASSERT_EQ(basis.size(), static_cast<std::size_t>(d * d));
    for (std::size_t a = 0; a < basis.size(); ++a) {
      EXPECT_EQ(hermitian_defect(basis[a]), 0.0);
      for (std::size_t b = 0; b < basis.size(); ++b) {
        const complex ip = (basis[a] * basis[b]).trace();
        EXPECT_NEAR(std::abs(ip - (a == b ? 2.0 : 0.0)), 0.0, 1e-14);
      }
    }
  }
}

TEST(GellMann, EntrywiseAssemblyMatchesBasis) {
  std::mt19937_64 rng(41);
  const int d = 4;
  const UnitaryParams theta = random_params(rng, d);
  const auto basis = gell_mann_basis(d);
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (std::size_t a = 0; a < basis.size(); ++a) h += theta[a] * basis[a];
  EXPECT_NEAR((hermitian_from_params(theta, d) - h).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(UnitaryFromParams, ZeroIsIdentity) {
  const ComplexMatrix u = unitary_from_params(UnitaryParams(16, 0.0), 4);
  EXPECT_EQ(u, ComplexMatrix(ComplexMatrix::Identity(4, 4)));
}

TEST(UnitaryFromParams, RandomParametersGiveUnitaries) {
  std::mt19937_64 rng(43);
  for (const int d : {4, 6, 9}) {
    for (int trial = 0; trial < 50; ++trial) {
      EXPECT_LE(aes::testing::unitarity_defect(unitary_from_params(random_params(rng, d), d)), 1e-12);
    }
  }
}

TEST(UnitaryFromParams, AgreesWithPowerSeries) {
  std::mt19937_64 rng(47);
  const UnitaryParams theta = random_params(rng, 4);
  const ComplexMatrix ih = complex(0.0, 1.0) * hermitian_from_params(theta, 4);
  // exp(X) = exp(X/2^s)^(2^s) with a truncated Taylor series for the small part.
  const int squarings = 12;
  const ComplexMatrix small = ih / std::pow(2.0, squarings);
  ComplexMatrix term = ComplexMatrix::Identity(4, 4);
  ComplexMatrix sum = term;
  for (int k = 1; k < 20; ++k) {
    term = term * small / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  EXPECT_NEAR((unitary_from_params(theta, 4) - sum).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(UnitaryFromParams, RejectsWrongLength) {
  EXPECT_THROW(unitary_from_params(UnitaryParams(15, 0.0), 4), invalid_input);
  EXPECT_THROW(unitary_from_params(UnitaryParams(16, std::nan("")), 4), invalid_input);
}

TEST(SetObjective, ReferenceValuesAtIdentity) {
  const UnitaryParams zero(16, 0.0);
  EXPECT_NEAR(set_objective(one_param_set(kQubits, 0.8), Measure::negativity, zero), 0.48, 1e-14);
  EXPECT_NEAR(set_objective(warmup_set().first, Measure::negativity, zero), 2.0, 1e-14);
  const StateSet products = StateSet::from_pure(
      "products", kQubits, {PureState::basis(4, 0), PureState::basis(4, 1), PureState::basis(4, 3)});
  EXPECT_EQ(set_objective(products, Measure::negativity, zero), 0.0);
  EXPECT_EQ(set_objective(products, Measure::entropy, zero), 0.0);
}

TEST(SetObjective, PureAndMixedRoutesAgree) {
  std::mt19937_64 rng(53);
  const StateSet pure = candidate_max_set();
  const StateSet mixed = add_white_noise(pure, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const UnitaryParams theta = random_params(rng, 4);
    EXPECT_NEAR(set_objective(pure, Measure::negativity, theta), set_objective(mixed, Measure::negativity, theta),
                1e-12);
  }
}

TEST(SetObjective, EntropyRequiresPureStates) {
  const StateSet mixed = add_white_noise(candidate_max_set(), 0.9);
  EXPECT_THROW(set_objective(mixed, Measure::entropy, UnitaryParams(16, 0.0)), invalid_input);
  EXPECT_THROW(set_objective(mixed, Measure::negativity, UnitaryParams(9, 0.0)), invalid_input);
}

TEST(Minimize, CandidateSetReachesKnownUpperBound) {
  const auto r = minimize_set_entanglement(candidate_max_set(), Measure::negativity, quick(50));
  EXPECT_NEAR(r.value, 0.4609, 5e-3);
  EXPECT_EQ(r.starts, 50);
}

TEST(Minimize, BoundaryOfOneParamFamilyIsSeparable) {
  const auto r = minimize_set_entanglement(one_param_set(kQubits, 0.5), Measure::negativity, quick(10));
  EXPECT_LE(r.value, 1e-6);
}

TEST(Minimize, WarmupFindsAProductingUnitary) {
  const StateSet s = warmup_set().first;
  const auto r = minimize_set_entanglement(s, Measure::negativity, quick(10));
  EXPECT_LE(r.value, 1e-6);
  const ComplexMatrix u = unitary_from_params(r.theta_opt, 4);
  for (const auto& psi : s.pure) EXPECT_LE(product_residual(ComplexVector(u * psi.amplitudes()), kQubits), 1e-5);
}

TEST(Minimize, ReportedValueIsReproducible) {
  for (const StateSet& s : {candidate_max_set(), add_white_noise(candidate_max_set(), 0.9)}) {
    const auto r = minimize_set_entanglement(s, Measure::negativity, quick(5));
    double sum = 0.0;
    for (const double e : r.per_state) {
      EXPECT_GE(e, 0.0);
      sum += e;
    }
    EXPECT_NEAR(sum, r.value, 1e-9);
    EXPECT_NEAR(set_objective(s, Measure::negativity, r.theta_opt), r.value, 1e-9);
    EXPECT_NEAR(negativity_via_pt(s, unitary_from_params(r.theta_opt, 4)), r.value, 1e-9);
  }
}

TEST(Minimize, MoreStartsNeverHurt) {
  const StateSet s = candidate_max_set();
  double previous = std::numeric_limits<double>::infinity();
  for (const int starts : {1, 3, 6, 12}) {
    const double v = minimize_set_entanglement(s, Measure::negativity, quick(starts)).value;
    EXPECT_LE(v, previous);
    previous = v;
  }
}

TEST(Minimize, DeterministicAcrossRunsAndWorkerCounts) {
  const StateSet s = add_white_noise(candidate_max_set(), 0.8);
  MinimizeOptions o = quick(4);
  const auto a = minimize_set_entanglement(s, Measure::negativity, o);
  const auto b = minimize_set_entanglement(s, Measure::negativity, o);
  o.jobs = 3;
  const auto c = minimize_set_entanglement(s, Measure::negativity, o);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.theta_opt, b.theta_opt);
  EXPECT_EQ(a.value, c.value);
  EXPECT_EQ(a.theta_opt, c.theta_opt);
  EXPECT_NE(initial_points(16, 2, 1)[1], initial_points(16, 2, 99)[1]);
}

TEST(Minimize, EntropyDominatesNegativityChainAtTheSameUnitary) {
  // Every state here has Schmidt rank at most 2, so S_k = f(N_k) and
  // convexity of f gives sum S_k >= K f(sum N_k / K).
  for (const StateSet& s : {candidate_max_set(), one_param_set(kQubits, 0.8)}) {
    const auto r = minimize_set_entanglement(s, Measure::entropy, quick(5));
    const double n = set_objective(s, Measure::negativity, r.theta_opt);
    const double k = static_cast<double>(s.size());
    EXPECT_GE(r.value, k * entropy_from_negativity(n / k) - 1e-9);
  }
}

TEST(Minimize, RejectsBadOptions) {
  EXPECT_THROW(minimize_set_entanglement(candidate_max_set(), Measure::negativity, quick(0)), invalid_input);
  EXPECT_THROW(minimize_set_entanglement(add_white_noise(candidate_max_set(), 0.5), Measure::entropy, quick(1)),
               invalid_input);
}

TEST(InitialPoints, PrefixStableAndStartsAtZero) {
  const auto few = initial_points(16, 3, 7);
  const auto many = initial_points(16, 10, 7);
  EXPECT_EQ(few[0], UnitaryParams(16, 0.0));
  for (std::size_t i = 0; i < few.size(); ++i) EXPECT_EQ(few[i], many[i]);
  for (const auto& x : many)
    for (const double v : x) {
      EXPECT_GE(v, -std::numbers::pi);
      EXPECT_LE(v, std::numbers::pi);
    }
}

TEST(Sweep, OneParamFamilyConcentratesNegativity) {
  const auto rows = sweep(one_param_family(kQubits, {0.6, 0.8, 0.95}), Measure::negativity, quick(4));
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    ASSERT_TRUE(row.ok()) << row.error;
    EXPECT_GT(row.result.value, 1e-4);
    int large = 0;
    for (const double e : row.result.per_state) large += e >= 1e-6 ? 1 : 0;
    EXPECT_EQ(large, 1) << row.param;
  }
}

TEST(Sweep, FullyMixedEndpointIsZero) {
  const auto rows = sweep(noise_family(candidate_max_set(), {0.0}), Measure::negativity, quick(1));
  ASSERT_TRUE(rows[0].ok());
  EXPECT_EQ(rows[0].result.value, 0.0);
}

TEST(Sweep, RowErrorsStayInTheirRow) {
  const auto rows = sweep(one_param_family(kQubits, {0.7, 1.2}), Measure::negativity, quick(1));
  EXPECT_TRUE(rows[0].ok());
  EXPECT_FALSE(rows[1].ok());
  EXPECT_NE(rows[1].error.find("(0,1)"), std::string::npos);
  EXPECT_THROW(sweep(one_param_family(kQubits, {}), Measure::negativity, quick(1)), invalid_input);
}

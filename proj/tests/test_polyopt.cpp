#include "aes/polyopt.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace aes;

namespace {

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(AES_GOLDEN_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing golden file " + name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Polynomial x(int i) { return Polynomial::variable(i); }

double min_eigenvalue(const RealMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Polynomial random_polynomial(std::mt19937_64& rng, int nvars, int degree) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::bernoulli_distribution keep(0.5);
  std::vector<Polynomial::Term> terms;
  for (const auto& m : monomial_basis(nvars, degree))
    if (keep(rng)) terms.emplace_back(m, coeff(rng));
  return Polynomial::from_terms(std::move(terms));
}

RealVector random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealVector p(n);
  for (int i = 0; i < n; ++i) p(i) = u(rng);
  return p;
}

}  // namespace

TEST(Monomial, GradedLexOrder) {
  const Monomial x1 = Monomial::variable(0), x2 = Monomial::variable(1);
  EXPECT_TRUE(Monomial() < x1);
  EXPECT_TRUE(x1 < x2);
  EXPECT_TRUE(x2 < x1 * x1);
  EXPECT_TRUE(x1 * x1 < x1 * x2);
  EXPECT_TRUE(x1 * x2 < x2 * x2);
  EXPECT_EQ(x1 * x2, x2 * x1);
  EXPECT_EQ((x1 * x1 * x2).exponents(3), (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(Monomial::from_exponents({2, 1, 0}), x1 * x1 * x2);
}

TEST(Monomial, DegreeCapIsEnforced) {
  Monomial m;
  for (int k = 0; k < Monomial::kMaxDegree; ++k) m = m * Monomial::variable(0);
  EXPECT_THROW(m * Monomial::variable(1), invalid_input);
}

TEST(Polynomial, ArithmeticCancelsAndSorts) {
  const Polynomial p = x(1) * x(1) + x(0);
  ASSERT_EQ(p.terms().size(), 2u);
  EXPECT_EQ(p.terms()[0].first, Monomial::variable(0));
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ((x(0) + 1.0) * (x(0) - 1.0), x(0) * x(0) - 1.0);
  EXPECT_EQ(p.degree(), 2);
  RealVector pt(2);
  pt << 2.0, 3.0;
  EXPECT_EQ(p.evaluate(pt), 11.0);
}

TEST(MonomialBasis, SizesAndOrder) {
  const auto b = monomial_basis(2, 2);
  ASSERT_EQ(b.size(), 6u);
  const Monomial x1 = Monomial::variable(0), x2 = Monomial::variable(1);
  EXPECT_EQ(b, (MonomialBasis{Monomial(), x1, x2, x1 * x1, x1 * x2, x2 * x2}));
  EXPECT_EQ(monomial_basis(7, 0), MonomialBasis{Monomial()});
  EXPECT_EQ(monomial_basis(32, 2).size(), 561u);
  EXPECT_EQ(monomial_basis(4, 3).size(), 35u);
  EXPECT_EQ(monomial_basis(5, 4).size(), 126u);
  EXPECT_THROW(monomial_basis(0, 1), invalid_input);
  EXPECT_THROW(monomial_basis(2, -1), invalid_input);
}

TEST(Golden, MomentMatrixTwoVariablesLevelTwo) {
  EXPECT_EQ(render(moment_matrix(monomial_basis(2, 2)), 2), read_golden("moment_n2_m2.txt"));
}

TEST(Golden, ScalarLocalizer) {
  const Polynomial g = x(0) + x(1) * x(1);
  EXPECT_EQ(render(localizing_matrix_scalar(g, monomial_basis(2, 1)), 2), read_golden("localizer_scalar.txt"));
}

TEST(Golden, MatrixLocalizer) {
  PolyMatrix g(2, 2);
  g(0, 0) = x(0);
  g(0, 1) = x(1);
  g(1, 0) = x(1);
  g(1, 1) = x(2);
  EXPECT_EQ(render(localizing_matrix_psd(g, monomial_basis(3, 1)), 3), read_golden("localizer_psd.txt"));
}

TEST(Localizer, ConstraintMajorBlocksAreScalarLocalizers) {
  std::mt19937_64 rng(61);
  PolyMatrix g(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) g(a, b) = g(b, a) = random_polynomial(rng, 3, 2);
  const auto basis = monomial_basis(3, 1);
  const int m = static_cast<int>(basis.size());
  const PolyMatrix big = localizing_matrix_psd(g, basis, LocalizerLayout::constraint_major);
  const PolyMatrix fine = localizing_matrix_psd(g, basis);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const PolyMatrix block = localizing_matrix_scalar(g(a, b), basis);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          EXPECT_EQ(big(a * m + i, b * m + j), block(i, j));
          EXPECT_EQ(fine(i * 3 + a, j * 3 + b), block(i, j));
        }
    }
}

TEST(Localizer, ReductionsToSimplerCases) {
  const auto basis = monomial_basis(3, 2);
  EXPECT_EQ(localizing_matrix_scalar(Polynomial(1.0), basis), moment_matrix(basis));
  const Polynomial g = x(0) * x(2) - 0.5 * x(1);
  PolyMatrix one(1, 1);
  one(0, 0) = g;
  EXPECT_EQ(localizing_matrix_psd(one, basis), localizing_matrix_scalar(g, basis));
  EXPECT_EQ(render(moment_matrix({Monomial()}), 1), "1\n");
  // Basis {1}: first moments of the entries.
  PolyMatrix two(2, 2);
  two(0, 0) = x(0);
  two(0, 1) = two(1, 0) = x(1);
  two(1, 1) = 2.0;
  EXPECT_EQ(render(localizing_matrix_psd(two, {Monomial()}), 2), "y_{1,0} & y_{0,1}\ny_{0,1} & 2\n");
}

TEST(Localizer, RejectsAsymmetricMatrix) {
  PolyMatrix g(2, 2);
  g(0, 1) = x(0);
  EXPECT_THROW(localizing_matrix_psd(g, monomial_basis(1, 1)), invalid_input);
}

TEST(LocalizeEquality, ReferenceCases) {
  EXPECT_TRUE(localize_equality(Polynomial(), monomial_basis(2, 1)).empty());
  const auto eqs = localize_equality(x(0) * x(0) - 1.0, {Monomial()});
  ASSERT_EQ(eqs.size(), 1u);
  EXPECT_EQ(render(eqs[0], 3), "-1+y_{2,0,0}");
  // {1, x1, x2}: products 1, x1, x2, x1^2, x1x2, x2^2.
  EXPECT_EQ(localize_equality(x(0) - 1.0, monomial_basis(2, 1)).size(), 6u);
}

TEST(Render, Coefficients) {
  EXPECT_EQ(render(2.5 * x(0) - x(1) + 3.0, 2), "3+2.5*y_{1,0}-y_{0,1}");
  EXPECT_EQ(render(Polynomial(), 2), "0");
  EXPECT_EQ(render(-1.0 * x(0), 1), "-y_{1}");
}

TEST(Dirac, MomentAndLocalizingMatricesArePsdAtPoints) {
  std::mt19937_64 rng(67);
  std::uniform_int_distribution<int> nvar_dist(1, 3), deg_dist(0, 3), size_dist(1, 3), basis_deg(0, 2);
  double worst_psd = 0.0;
  double worst_eq = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = nvar_dist(rng);
    const RealVector point = random_point(rng, n);
    const auto basis = monomial_basis(n, basis_deg(rng));

    worst_psd = std::min(worst_psd, min_eigenvalue(moment_matrix(basis).evaluate(point)));

    // g(x*) = r >= 0 by construction.
    const Polynomial p = random_polynomial(rng, n, deg_dist(rng));
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Polynomial g = p - p.evaluate(point) + r;
    worst_psd = std::min(worst_psd, min_eigenvalue(localizing_matrix_scalar(g, basis).evaluate(point)));

    // G(x*) = R R^T by construction.
    const int s = size_dist(rng);
    RealMatrix rr = RealMatrix::Random(s, s);
    rr = rr * rr.transpose();
    PolyMatrix big(s, s);
    for (int a = 0; a < s; ++a)
      for (int b = a; b < s; ++b) {
        const Polynomial q = random_polynomial(rng, n, deg_dist(rng));
        big(a, b) = big(b, a) = q - q.evaluate(point) + rr(a, b);
      }
    for (const auto layout : {LocalizerLayout::basis_major, LocalizerLayout::constraint_major})
      worst_psd = std::min(worst_psd, min_eigenvalue(localizing_matrix_psd(big, basis, layout).evaluate(point)));

    const Polynomial h = p - p.evaluate(point);
    for (const auto& e : localize_equality(h, basis)) worst_eq = std::max(worst_eq, std::abs(e.evaluate(point)));
  }
  EXPECT_GE(worst_psd, -1e-10);
  EXPECT_LE(worst_eq, 1e-10);
}

TEST(Assemble, VariableTableAndDegreeCheck) {
  const Polynomial objective = x(0);
  std::vector<Inequality> ineqs{{Polynomial(1.0 - x(0) * x(0) - x(1) * x(1)), monomial_basis(2, 1), "disc"}};
  std::vector<Equality> eqs{{x(0) - x(1), monomial_basis(2, 1)}};
  const SymbolicSDP sdp = assemble_relaxation(2, objective, ineqs, eqs, {monomial_basis(2, 2)});
  ASSERT_FALSE(sdp.moments.empty());
  EXPECT_TRUE(sdp.moments.front().is_one());
  EXPECT_TRUE(std::is_sorted(sdp.moments.begin(), sdp.moments.end()));
  EXPECT_EQ(std::adjacent_find(sdp.moments.begin(), sdp.moments.end()), sdp.moments.end());
  // Degree-4 moments in two variables: all 15.
  EXPECT_EQ(sdp.moments.size(), 15u);
  EXPECT_EQ(sdp.psd_blocks.size(), 2u);
  EXPECT_EQ(sdp.equalities.size(), 6u);
  EXPECT_EQ(sdp.moment_index(Monomial::variable(1)), 2);
  EXPECT_EQ(sdp.moment_index(Monomial::variable(0) * Monomial::variable(0) * Monomial::variable(0) *
                             Monomial::variable(0) * Monomial::variable(0)),
            -1);
  EXPECT_NE(dump(sdp).find("block disc 3x3"), std::string::npos);

  EXPECT_THROW(assemble_relaxation(2, x(0) * x(0) * x(0), {}, {}, {monomial_basis(2, 1)}), invalid_input);
  EXPECT_THROW(assemble_relaxation(1, x(3), {}, {}, {monomial_basis(1, 1)}), invalid_input);
}

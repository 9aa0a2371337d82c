#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "afflat/diophantine.hpp"

using namespace afflat;

namespace {

ShiftVector surds(std::initializer_list<QuadraticSurd> xs) { return ShiftVector(std::vector<QuadraticSurd>(xs)); }

ShiftVector numeric(std::initializer_list<double> xs) {
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return ShiftVector(v);
}

const QuadraticSurd kOne(1);
const QuadraticSurd kThird = QuadraticSurd(Rational(1, 3));
const QuadraticSurd kHalf = QuadraticSurd(Rational(1, 2));

}  // namespace

TEST(FracDist, Examples) {
  EXPECT_EQ(frac_dist(0.5), 0.5);
  EXPECT_EQ(frac_dist(3.25), 0.25);
  EXPECT_NEAR(frac_dist(-0.1), 0.1, 1e-16);
  EXPECT_EQ(frac_dist(-7.0), 0.0);
}

TEST(Surd, Arithmetic) {
  EXPECT_EQ(QuadraticSurd::sqrt(8), QuadraticSurd(2) * QuadraticSurd::sqrt(2));
  EXPECT_TRUE(QuadraticSurd::sqrt(49).is_integer());
  const auto a = kOne + QuadraticSurd::sqrt(2), b = kOne - QuadraticSurd::sqrt(2);
  EXPECT_EQ(a * b, QuadraticSurd(-1));
  EXPECT_EQ(kOne / a, -b);
  EXPECT_NEAR((QuadraticSurd::sqrt(3) - kOne).to_double(), std::sqrt(3.0) - 1, 2e-16);
  EXPECT_EQ((QuadraticSurd::sqrt(2) * QuadraticSurd::sqrt(6)), QuadraticSurd(2) * QuadraticSurd::sqrt(3));
  EXPECT_THROW(kOne / (QuadraticSurd::sqrt(2) + QuadraticSurd::sqrt(3)), UsageError);
  EXPECT_THROW(kOne / QuadraticSurd(0), DomainError);
  EXPECT_THROW(QuadraticSurd::sqrt(-2), DomainError);
}

TEST(Surd, FracDistInExtendedPrecision) {
  // 10^8 sqrt 2 lies 0.0376... above an integer; double-rounding would lose digits.
  const auto x = QuadraticSurd(100000000) * QuadraticSurd::sqrt(2);
  const double want = 100000000 * std::sqrt(2.0) - std::floor(100000000 * std::sqrt(2.0));
  EXPECT_NEAR(x.frac_dist(), std::min(want, 1 - want), 1e-7);
  EXPECT_EQ(QuadraticSurd(Rational(7, 2)).frac_dist(), 0.5);
}

TEST(DotFracDist, ExactResonanceIsConfirmed) {
  // sqrt2 + (1 - sqrt2) = 1 exactly.
  const auto xi = surds({QuadraticSurd::sqrt(2), kOne - QuadraticSurd::sqrt(2)});
  EXPECT_EQ(dot_frac_dist(xi, (IntRowVector(2) << 1, 1).finished()), 0.0);
  EXPECT_NEAR(dot_frac_dist(xi, (IntRowVector(2) << 1, 0).finished()), std::sqrt(2.0) - 1, 1e-15);
  const auto big = dot_frac_dist(numeric({0.1, 0.2}), (IntRowVector(2) << 10000000, 10000000).finished());
  EXPECT_LT(big, 1e-8);
}

TEST(Zeta, Examples) {
  EXPECT_EQ(zeta(surds({kThird, kHalf}), 10), 2);
  EXPECT_EQ(zeta(numeric({1.0 / 3, 0.5}), 10), 2);
  EXPECT_EQ(zeta(numeric({0.0, 0.0, 0.0}), 1e6), 1);
  EXPECT_EQ(zeta(numeric({0.37}), 1.0), 1);
  EXPECT_THROW(zeta(numeric({0.3}), 0.0), UsageError);
}

TEST(Zeta, DirichletBound) {
  EXPECT_EQ(dirichlet_bound(1000, 3), 10);
  EXPECT_EQ(dirichlet_bound(10000, 2), 100);
  EXPECT_EQ(dirichlet_bound(10, 2), 4);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const int d = 2 + rep % 2;
    Eigen::RowVectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = u(rng);
    const ShiftVector xi(v);
    long long prev = 0;
    for (double T : {10.0, 100.0, 1000.0, 10000.0}) {
      const long long z = zeta(xi, T);
      EXPECT_LE(z, dirichlet_bound(T, d));
      EXPECT_GE(z, prev);
      prev = z;
    }
  }
}

TEST(Zeta, ShellScanEqualsBoxScan) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 60; ++rep) {
    const int d = 1 + rep % 3;
    Eigen::RowVectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = u(rng);
    const ShiftVector xi(v);
    for (double T : {3.0, 30.0, 300.0, 1000.0}) EXPECT_EQ(zeta(xi, T), zeta_box_oracle(xi, T)) << rep << " " << T;
  }
}

TEST(Zeta, BudgetIsEnforced) {
  ScanLimits tiny;
  tiny.point_budget = 100;
  EXPECT_THROW(zeta(numeric({std::sqrt(2.0) - 1, std::sqrt(3.0) - 1}), 1e6, tiny), ResourceError);
}

// If |xi.m|_Z >= C |m|^{-kappa} for |m| <= N0, then zeta(xi, T) > (C T)^{1/kappa}
// as long as zeta(xi, T) <= N0.
TEST(Zeta, DiophantineTypeWitness) {
  const auto xi = surds({QuadraticSurd::sqrt(2) - kOne, QuadraticSurd::sqrt(3) - kOne});
  const double kappa = 2.0;
  const long long N0 = 60;
  double C = INFINITY;
  for (long long a = -N0; a <= N0; ++a)
    for (long long b = -N0; b <= N0; ++b) {
      if (!a && !b) continue;
      const double norm = static_cast<double>(std::max(std::llabs(a), std::llabs(b)));
      C = std::min(C, dot_frac_dist(xi, (IntRowVector(2) << a, b).finished()) * std::pow(norm, kappa));
    }
  ASSERT_GT(C, 0.0);
  for (double T = 2; T < 1e5; T *= 1.7) {
    const long long z = zeta(xi, T);
    if (z > N0) break;
    EXPECT_GT(static_cast<double>(z), std::pow(C * T, 1 / kappa)) << T;
  }
}

TEST(Vaguely, SingleTermAndRationalGrowth) {
  const auto xi = surds({kThird, kHalf});
  auto r = vaguely_diophantine_partial(xi, 1.5, 0.7, 2.0, 1);
  ASSERT_EQ(r.terms.size(), 1u);
  EXPECT_NEAR(r.partial_sum, std::pow(2.0, 0.7), 1e-14);

  r = vaguely_diophantine_partial(xi, 0.0, 0.5, 2.0, 20);
  EXPECT_NE(r.diagnostic.find("divergence"), std::string::npos) << r.diagnostic;
  EXPECT_EQ(r.diagnostic.rfind("diagnostic", 0), 0u);
  EXPECT_THROW(vaguely_diophantine_partial(xi, 0, 0, 1, 61), UsageError);
}

TEST(Vaguely, GoldenRatioSettles) {
  const auto phi = (QuadraticSurd::sqrt(5) - kOne) / QuadraticSurd(2);
  const auto r = vaguely_diophantine_partial(surds({phi}), 0.0, 0.0, 2.0, 22);
  ASSERT_EQ(r.terms.size(), 22u);
  EXPECT_FALSE(r.budget_exhausted);
  EXPECT_LT(std::abs(r.terms[21].partial - r.terms[15].partial), 1e-6);
}

TEST(Brjuno, RationalResonance) {
  const auto r = brjuno_partial(surds({kThird, kHalf}), 1.0, 6);
  EXPECT_TRUE(r.resonance);
  EXPECT_EQ(r.verdict.rfind("not Brjuno (exact resonance at m = ", 0), 0u) << r.verdict;
  EXPECT_TRUE(std::isinf(r.partial_sum));
}

TEST(Brjuno, PhiMonotoneAndChainInequality) {
  const auto xi = surds({QuadraticSurd::sqrt(2) - kOne, QuadraticSurd::sqrt(3) - kOne});
  const auto r = brjuno_partial(xi, 1.0, 9);
  EXPECT_FALSE(r.resonance);
  for (std::size_t i = 1; i < r.terms.size(); ++i) EXPECT_GE(r.terms[i].phi, r.terms[i - 1].phi);
  EXPECT_NEAR(r.terms.back().partial, r.partial_sum, 1e-12);
  // zeta(xi, 2^{l-1}) >= (l - 1)^s for s = 1 and large l.
  for (int l = 16; l <= 26; ++l) EXPECT_GE(static_cast<double>(zeta(xi, std::ldexp(1.0, l - 1))), l - 1.0);
}

TEST(Profile, TablesAndCsv) {
  const auto xi = numeric({std::sqrt(2.0) - 1, std::sqrt(3.0) - 1});
  const auto p = diophantine_profile(xi, {10, 100, 1000}, 4);
  ASSERT_EQ(p.zeta_table.size(), 3u);
  EXPECT_LE(p.zeta_table[0].second, p.zeta_table[2].second);
  std::ostringstream os;
  write_zeta_csv(os, p.zeta_table);
  EXPECT_EQ(os.str().substr(0, 8), "T,zeta\n1");
}

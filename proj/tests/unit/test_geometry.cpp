#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>
#include <numbers>
#include <random>

#include "afflat/constants.hpp"
#include "afflat/geometry.hpp"
#include "afflat/lattice_enum.hpp"

using namespace afflat;

namespace {

Eigen::MatrixXd random_sl(int d, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> n(0.0, spread);
  Eigen::MatrixXd M(d, d);
  for (;;) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = n(rng);
    double det = M.determinant();
    if (std::abs(det) < 1e-3) continue;
    if (det < 0) M.row(0) *= -1.0, det = -det;
    return M / std::pow(det, 1.0 / d);
  }
}

Eigen::RowVectorXd random_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::RowVectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v.normalized();
}

IntMatrix random_unimodular(int d, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, d - 1), coef(-3, 3);
  IntMatrix U = IntMatrix::Identity(d, d);
  for (int step = 0; step < 8; ++step) {
    const int i = pick(rng), j = pick(rng);
    if (i != j) U.row(i) += coef(rng) * U.row(j);
  }
  return U;
}

}  // namespace

TEST(GroupLaw, IdentityAndTranslations) {
  Eigen::MatrixXd M(2, 2);
  M << 2, 1, 1, 1;
  Eigen::RowVector2d b(0.3, -0.7);
  const auto g = AffineGroupElementd(M, b);
  const auto e = AffineGroupElementd::identity(2);
  EXPECT_EQ((e * g).matrix(), M);
  EXPECT_EQ((e * g).shift(), Eigen::RowVectorXd(b));

  const auto h = AffineGroupElementd::translation(b) * AffineGroupElementd::linear(M);
  EXPECT_TRUE(h.shift().isApprox(b * M));

  const auto t = AffineGroupElementd::translation(Eigen::RowVector2d(1, 0)) *
                 AffineGroupElementd::translation(Eigen::RowVector2d(0, 1));
  EXPECT_EQ(t.shift(), Eigen::RowVectorXd(Eigen::RowVector2d(1, 1)));
  EXPECT_TRUE(t.matrix().isIdentity());
}

TEST(GroupLaw, ActionIsCompatibleWithProduct) {
  std::mt19937_64 rng(7);
  for (int d = 2; d <= 4; ++d) {
    const AffineGroupElementd g(random_sl(d, rng), random_unit(d, rng));
    const AffineGroupElementd h(random_sl(d, rng), random_unit(d, rng));
    const Eigen::RowVectorXd x = random_unit(d, rng);
    EXPECT_LT((h.act(g.act(x)) - (g * h).act(x)).norm(), 1e-12);
    EXPECT_LT(((g * g.inverse()).matrix() - Eigen::MatrixXd::Identity(d, d)).norm(), 1e-12);
  }
}

TEST(GroupLaw, RejectsBadInput) {
  EXPECT_THROW(AffineGroupElementd(Eigen::MatrixXd::Identity(2, 2) * 2.0, Eigen::RowVectorXd::Zero(2)), NumericError);
  EXPECT_THROW(AffineGroupElementd(Eigen::MatrixXd::Identity(2, 2), Eigen::RowVectorXd::Zero(3)), UsageError);
  EXPECT_THROW(multiply(AffineGroupElementd::identity(2), AffineGroupElementd::identity(3)), UsageError);
}

TEST(Iwasawa, ClosedFormCases) {
  auto c = iwasawa<double>(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(c.u.isZero());
  EXPECT_TRUE(c.v.isOnes());
  EXPECT_TRUE(c.k.isIdentity(1e-14));

  Eigen::MatrixXd N(2, 2);
  N << 1, 0.4, 0, 1;
  c = iwasawa<double>(N);
  EXPECT_NEAR(c.u(0), 0.4, 1e-14);
  EXPECT_NEAR(c.v(0), 1.0, 1e-14);
  EXPECT_TRUE(c.k.isIdentity(1e-14));

  Eigen::MatrixXd D(2, 2);
  D << 2, 0, 0, 0.5;
  c = iwasawa<double>(D);
  EXPECT_NEAR(c.v(0), 2.0, 1e-14);
  EXPECT_NEAR(c.v(1), 0.5, 1e-14);
  EXPECT_NEAR(c.u(0), 0.0, 1e-14);
}

TEST(Iwasawa, ReconstructionOnRandomMatrices) {
  std::mt19937_64 rng(11);
  for (int d = 2; d <= 5; ++d)
    for (int rep = 0; rep < 40; ++rep) {
      const Eigen::MatrixXd M = random_sl(d, rng);
      const auto c = iwasawa<double>(M);
      EXPECT_LT((c.reconstruct() - M).norm(), 1e-9);
      EXPECT_LT((c.k.transpose() * c.k - Eigen::MatrixXd::Identity(d, d)).norm(), 1e-10);
      EXPECT_NEAR(c.k.determinant(), 1.0, 1e-10);
      EXPECT_NEAR(c.v.prod(), 1.0, 1e-10);
      EXPECT_TRUE((c.v.array() > 0).all());
    }
}

TEST(Iwasawa, IllConditionedIsNumericError) {
  Eigen::MatrixXd M(2, 2);
  M << 1e7, 0, 0, 1e-7;
  EXPECT_THROW(iwasawa<double>(M), NumericError);
}

TEST(Iwasawa, LongDoubleInstantiation) {
  MatrixX<long double> M(2, 2);
  M << 2, 1, 1, 1;
  const auto c = iwasawa<long double>(M);
  EXPECT_LT(static_cast<double>((c.reconstruct() - M).norm()), 1e-15);
}

TEST(Horosphere, PhiAndN) {
  for (double t : {1.0, 5.0, 20.0})
    for (int d = 2; d <= 4; ++d) EXPECT_NEAR(phi_t(t, d).determinant(), 1.0, 1e-9);
  const double T = 7.0;
  const auto P = phi_t(2.0 * std::log(T), 2);
  EXPECT_NEAR(P(0, 0), 1.0 / T, 1e-12);
  EXPECT_NEAR(P(1, 1), T, 1e-12);
  Eigen::RowVectorXd y(2);
  y << 0.25, -0.5;
  const auto N = tilde_n(y);
  EXPECT_EQ(N(0, 1), 0.25);
  EXPECT_EQ(N(0, 2), -0.5);
  EXPECT_EQ(N(1, 1), 1.0);
  EXPECT_EQ(N(2, 0), 0.0);
}

TEST(RotateToE1, Examples) {
  Eigen::RowVectorXd e1 = Eigen::RowVectorXd::Unit(3, 0);
  EXPECT_TRUE(rotate_to_e1(e1).isIdentity());
  EXPECT_TRUE(direction_generator(e1).isZero());

  Eigen::RowVectorXd v(2);
  v << 0, 1;
  const auto k = rotate_to_e1(v);
  Eigen::Matrix2d expected;
  expected << 0, -1, 1, 0;
  EXPECT_LT((k - Eigen::MatrixXd(expected)).norm(), 1e-15);
  EXPECT_NEAR(direction_generator(v)(0), std::numbers::pi / 2, 1e-15);

  Eigen::RowVectorXd minus(2);
  minus << -1, 0;
  EXPECT_THROW(rotate_to_e1(minus), DomainError);
  EXPECT_THROW(rotate_to_e1(Eigen::RowVectorXd(Eigen::RowVector2d(2, 0))), DomainError);
}

// Oracle: k(v) is the exponential of the antisymmetric generator built from y(v).
TEST(RotateToE1, MatchesMatrixExponential) {
  std::mt19937_64 rng(3);
  for (int d = 2; d <= 5; ++d)
    for (int rep = 0; rep < 30; ++rep) {
      Eigen::RowVectorXd v = random_unit(d, rng);
      if (v(0) < -0.99) continue;
      const auto y = direction_generator(v);
      Eigen::MatrixXd X = Eigen::MatrixXd::Zero(d, d);
      X.block(0, 1, 1, d - 1) = -y;
      X.block(1, 0, d - 1, 1) = y.transpose();
      const Eigen::MatrixXd k_exp = X.exp();
      const auto k = rotate_to_e1(v);
      EXPECT_LT((k - k_exp).norm(), 1e-10);
      EXPECT_LT((v * k - Eigen::RowVectorXd::Unit(d, 0)).norm(), 1e-10);
      EXPECT_NEAR(k.determinant(), 1.0, 1e-10);
    }
}

TEST(SiegelReduce, Examples) {
  Eigen::RowVectorXd b(2);
  b << 0.75, -0.25;
  auto sc = siegel_reduce(AffineGroupElementd(Eigen::MatrixXd::Identity(2, 2), b));
  EXPECT_NEAR(sc.b(0), -0.25, 1e-15);
  EXPECT_NEAR(sc.b(1), -0.25, 1e-15);
  EXPECT_TRUE(sc.v().isOnes(1e-12));

  std::mt19937_64 rng(5);
  for (int d = 2; d <= 4; ++d) {
    const IntMatrix U = random_unimodular(d, rng);
    Eigen::MatrixXd G = U.cast<double>();
    if (G.determinant() < 0) G.row(0) *= -1.0;
    sc = siegel_reduce(AffineGroupElementd::linear(G));
    EXPECT_TRUE(sc.v().isOnes(1e-9)) << sc.v().transpose();
  }
}

// Oracle: the last Iwasawa coordinate of a reduced basis is the length of a
// shortest lattice vector in d = 2; exhaustive search over a box.
TEST(SiegelReduce, ShortestVectorAgainstExhaustiveSearch) {
  std::mt19937_64 rng(17);
  Eigen::MatrixXd shear(2, 2);
  shear << 1, 0, 10, 1;
  std::vector<Eigen::MatrixXd> cases{shear};
  for (int i = 0; i < 30; ++i) cases.push_back(random_sl(2, rng, 2.0));
  for (const auto& M : cases) {
    const auto sc = siegel_reduce<double>(M);
    double best = INFINITY;
    for (int a = -20; a <= 20; ++a)
      for (int c = -20; c <= 20; ++c)
        if (a || c) best = std::min(best, (Eigen::RowVector2d(a, c) * M).norm());
    EXPECT_NEAR(sc.v()(1), best, 1e-9 * best);
  }
}

TEST(SiegelReduce, Invariants) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int d = 2; d <= 5; ++d)
    for (int rep = 0; rep < 25; ++rep) {
      const Eigen::MatrixXd M = random_sl(d, rng, 1.5);
      Eigen::RowVectorXd a(d);
      for (int i = 0; i < d; ++i) a(i) = u(rng);
      const AffineGroupElementd g(M, a);
      const auto sc = siegel_reduce(g);
      EXPECT_EQ(std::llabs(detail::exact_determinant(sc.gamma)), 1);
      EXPECT_LT((sc.gamma.cast<double>() * M - sc.reduced).norm(), 1e-8 * M.norm());
      EXPECT_NEAR(sc.reduced.determinant(), 1.0, 1e-8);
      for (int i = 0; i < d; ++i) {
        EXPECT_GE(sc.b(i), -0.5);
        EXPECT_LT(sc.b(i), 0.5);
      }
      const double kappa = siegel_slack(d);
      for (int j = 0; j + 1 < d; ++j) EXPECT_LE(sc.v()(j + 1), kappa * 2.0 / std::sqrt(3.0) * sc.v()(j) * (1 + 1e-9));
      for (Eigen::Index k = 0; k < sc.iwasawa.u.size(); ++k) EXPECT_LE(std::abs(sc.iwasawa.u(k)), 0.5 + 1e-9);
      // The affine point a lies in (Z^d + b) M_red.
      const Eigen::RowVectorXd coords = a * sc.reduced.inverse() - sc.b;
      EXPECT_LT((coords.array() - coords.array().round()).abs().maxCoeff(), 1e-8);
    }
}

TEST(EscapeMass, Examples) {
  const auto k = Constants::for_dimension(2);
  const auto e = AffineGroupElementd::identity(2);
  EXPECT_EQ(escape_mass_F(e, 1.0, 2.0, k.delta_d), 1.0);
  EXPECT_EQ(escape_mass_F(e, 2.0, 2.0, k.delta_d), 0.0);

  const double R = 100.0, v1 = 2 * R;
  ASSERT_GT(v1, 2 * k.cd_siegel * k.delta_d);
  Eigen::MatrixXd M(2, 2);
  M << v1, 0, 0, 1 / v1;
  const auto g = AffineGroupElementd::linear(M);
  EXPECT_NEAR(escape_mass_F(g, R, 2.0, k.delta_d), v1 * v1, 1e-6);
  EXPECT_EQ(escape_mass_F(g, 3 * R, 2.0, k.delta_d), 0.0);
  EXPECT_THROW(escape_mass_F(g, 0.5, 2.0, k.delta_d), UsageError);
}

TEST(EscapeMass, InvariantUnderIntegerGroup) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<int> shift(-5, 5);
  const auto k = Constants::for_dimension(2);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd A(2, 2);
    const double v1 = 200.0 + 400.0 * (u(rng) + 0.5);
    A << v1, 0, 0, 1 / v1;
    Eigen::RowVectorXd b(2);
    b << 0.2 * u(rng), u(rng);
    Eigen::RowVectorXd y(1);
    y << u(rng);
    const AffineGroupElementd g(A * rotate_to_e1(random_unit(2, rng).cwiseAbs().eval()) * tilde_n(y), b);
    const IntMatrix U = random_unimodular(2, rng);
    Eigen::MatrixXd G = U.cast<double>();
    if (G.determinant() < 0) G.row(0) *= -1.0;
    Eigen::RowVectorXd m(2);
    m << shift(rng), shift(rng);
    const auto gamma = AffineGroupElementd(G, m * G);
    const double f0 = escape_mass_F(g, 150.0, 2.5, k.delta_d);
    const double f1 = escape_mass_F(gamma * g, 150.0, 2.5, k.delta_d);
    EXPECT_NEAR(f0, f1, 1e-8 * std::max(1.0, f0));
  }
}

TEST(Lemma31, BoundOnRandomInstances) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 2 + rep % 2;
    const AffineGroupElementd g(random_sl(d, rng, 0.8), random_unit(d, rng) * 3.0 * u(rng));
    const ConeSpec cone(0.5 * u(rng), 0.1 + 3.0 * u(rng), d);
    const double eta = 0.5 + 3.0 * u(rng);
    const auto N = static_cast<double>(count_in_cone(g, cone));
    EXPECT_LE(std::pow(N, eta), lemma31_bound(g, cone, eta) * (1 + 1e-12));
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(Lemma31, TrivialCase) {
  const auto k = Constants::for_dimension(2);
  const double b = lemma31_bound(AffineGroupElementd::identity(2), k.delta_d, 1.5);
  EXPECT_NEAR(b, std::pow(k.C_d * k.delta_d * k.delta_d, 1.5), 1e-9 * b);
}

TEST(Constants, Values) {
  EXPECT_NEAR(sphere_volume(2), 2 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_volume(3), 4 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(ball_volume(2), std::numbers::pi, 1e-14);
  const auto k = Constants::for_dimension(3);
  EXPECT_NEAR(k.cd_siegel, 3 * std::pow(2 / std::sqrt(3.0), 3), 1e-12);
  EXPECT_EQ(k.delta_d, 192.0);
  EXPECT_NEAR(k.C_d, 2 * (k.cd_siegel + 1), 1e-12);
  EXPECT_NEAR(k.cd_norm, std::pow(4 * std::numbers::pi, -0.5), 1e-14);
}

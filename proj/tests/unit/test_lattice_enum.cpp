#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "afflat/constants.hpp"
#include "afflat/lattice_enum.hpp"

using namespace afflat;

namespace {

Eigen::MatrixXd random_sl(int d, std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  Eigen::MatrixXd M(d, d);
  for (;;) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = n(rng) + (i == j ? 1.0 : 0.0);
    double det = M.determinant();
    if (std::abs(det) < 0.2) continue;
    if (det < 0) M.row(0) *= -1.0, det = -det;
    return M / std::pow(det, 1.0 / d);
  }
}

std::set<std::vector<long long>> coords(const ShellPoints& p) {
  std::set<std::vector<long long>> s;
  for (Eigen::Index i = 0; i < p.size(); ++i) s.insert(std::vector<long long>(p.m.row(i).begin(), p.m.row(i).end()));
  return s;
}

}  // namespace

TEST(EnumerateShell, SmallSquareLattice) {
  const auto L = AffineLattice::standard(Eigen::RowVectorXd::Zero(2));
  const auto p = enumerate_shell(L, {0.0, 1.5});
  // The origin has no direction and is never part of the point set.
  ASSERT_EQ(p.size(), 8);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(p.norm(i), 1.0);
  for (int i = 4; i < 8; ++i) EXPECT_DOUBLE_EQ(p.norm(i), std::sqrt(2.0));
  // Ties are broken lexicographically in m.
  EXPECT_EQ(p.m.row(0), (IntRowVector(2) << -1, 0).finished());
  EXPECT_EQ(p.m.row(3), (IntRowVector(2) << 1, 0).finished());
}

TEST(EnumerateShell, MatchesBruteForce) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int discrepancies = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 2 + rep % 3;
    Eigen::RowVectorXd xi(d);
    for (int i = 0; i < d; ++i) xi(i) = u(rng) * 2.0 - 1.0;
    const Eigen::MatrixXd M = random_sl(d, rng, 0.3);
    const AffineLattice L(M, xi);
    // Keep every shell point inside the oracle box: |m| <= T |M^{-1}| + |xi|.
    const double reach = M.inverse().operatorNorm();
    const double T = std::min(1.0 + 4.0 * u(rng), (9.0 - xi.cwiseAbs().maxCoeff()) / reach);
    const ShellSpec sh{0.6 * u(rng), T};
    const auto fast = enumerate_shell(L, sh);
    const auto slow = brute_force_oracle(
        L, [&](const Eigen::RowVectorXd& x) { const double r = x.norm(); return r > 0 && sh.contains_norm(r); }, 10);
    if (coords(fast) != coords(slow) || fast.size() != slow.size()) ++discrepancies;
    for (Eigen::Index i = 1; i < fast.size(); ++i) EXPECT_LE(fast.norm(i - 1), fast.norm(i));
  }
  EXPECT_EQ(discrepancies, 0);
}

TEST(EnumerateShell, CountGrowsLikeVolume) {
  const auto L2 = AffineLattice::standard(Eigen::RowVector2d(0.4, 0.7));
  const double T = 200.0;
  const auto n2 = static_cast<double>(enumerate_shell(L2, {0.0, T}).size());
  EXPECT_NEAR(n2 / (std::numbers::pi * T * T), 1.0, 0.02);

  const auto L3 = AffineLattice::standard(Eigen::RowVector3d(0.4, 0.7, 0.1));
  const ShellSpec sh3{0.3, 40.0};
  const auto n3 = static_cast<double>(enumerate_shell(L3, sh3).size());
  EXPECT_NEAR(n3 / sh3.volume(3), 1.0, 0.02);
}

TEST(EnumerateShell, IntegerShiftAndBasisChangeGiveSameSet) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd M = random_sl(3, rng, 0.3);
  const Eigen::RowVector3d xi(0.3, -0.1, 0.45);
  const auto a = enumerate_shell(AffineLattice(M, xi), {0.2, 4.0});
  const auto b = enumerate_shell(AffineLattice(M, xi + Eigen::RowVector3d(2, -1, 5)), {0.2, 4.0});
  ASSERT_EQ(a.size(), b.size());
  EXPECT_LT((a.norm - b.norm).cwiseAbs().maxCoeff(), 1e-12);

  // Same affine lattice written with the basis gamma M and shift xi gamma^{-1}.
  Eigen::Matrix3d gamma;
  gamma << 1, 2, 0, 0, 1, 0, 1, 1, 1;
  const auto c = enumerate_shell(AffineLattice(gamma * M, xi * gamma.inverse()), {0.2, 4.0});
  ASSERT_EQ(a.size(), c.size());
  EXPECT_LT((a.norm - c.norm).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(EnumerateShell, Guards) {
  const auto L = AffineLattice::standard(Eigen::RowVectorXd::Zero(3));
  EnumerationOptions tight;
  tight.budget = 100;
  EXPECT_THROW(enumerate_shell(L, {0.0, 50.0}, tight), ResourceError);
  EXPECT_THROW(enumerate_shell(L, {1.0, 5.0}), UsageError);
  EXPECT_THROW(enumerate_shell(L, {0.0, -1.0}), UsageError);
}

TEST(BruteForce, EmptyRegionAndIntegerShift) {
  const auto L = AffineLattice::standard(Eigen::RowVector2d(0.3, 0.2));
  EXPECT_EQ(brute_force_oracle(L, [](const Eigen::RowVectorXd&) { return false; }, 5).size(), 0);
  const auto a = brute_force_oracle(AffineLattice::standard(Eigen::RowVector2d(1, -2)),
                                    [](const Eigen::RowVectorXd& x) { return x.norm() <= 3.0; }, 5);
  const auto b = brute_force_oracle(AffineLattice::standard(Eigen::RowVector2d(0, 0)),
                                    [](const Eigen::RowVectorXd& x) { return x.norm() <= 3.0; }, 5);
  EXPECT_EQ(a.size(), b.size());
  EXPECT_THROW(brute_force_oracle(L, [](const Eigen::RowVectorXd&) { return true; }, 11), ResourceError);
}

TEST(Cone, VolumeByQuadrature) {
  for (int d = 2; d <= 5; ++d)
    for (double c : {0.0, 0.3, 0.8})
      for (double sigma : {0.5, 1.0, 5.0}) {
        const ConeSpec cone(c, sigma, d);
        EXPECT_NEAR(cone.volume_quadrature() / sigma, 1.0, 1e-6) << d << " " << c << " " << sigma;
      }
  EXPECT_THROW(ConeSpec(1.0, 1.0, 2), UsageError);
  EXPECT_THROW(ConeSpec(0.0, -1.0, 2), UsageError);
}

TEST(Cone, CountMatchesBruteForce) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 2 + rep % 2;
    Eigen::RowVectorXd b(d);
    for (int i = 0; i < d; ++i) b(i) = u(rng);
    const AffineGroupElementd g(random_sl(d, rng, 0.4), b);
    const ConeSpec cone(0.3 * u(rng), 0.5 + 4.5 * u(rng), d);
    const auto n = count_in_cone(g, cone);
    const auto oracle = brute_force_oracle(g, [&](const Eigen::RowVectorXd& x) { return cone.contains(x); }, 10);
    if (n != oracle.size()) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Cone, SmallConeMissesShiftedIntegers) {
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Constant(3, 0.5 * 1e-3);
  const auto g = AffineGroupElementd(Eigen::MatrixXd::Identity(3, 3), b);
  EXPECT_EQ(count_in_cone(g, ConeSpec(0.0, 0.01, 3)), 0);
}

TEST(Cone, InvariantUnderIntegerGroup) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Matrix2d gamma;
  gamma << 2, 1, 1, 1;
  for (int rep = 0; rep < 20; ++rep) {
    const AffineGroupElementd g(random_sl(2, rng, 0.5), Eigen::RowVector2d(u(rng), u(rng)));
    const AffineGroupElementd gp(gamma, Eigen::RowVector2d(3, -2) * gamma);
    const ConeSpec cone(0.1, 3.0, 2);
    EXPECT_EQ(count_in_cone(gp * g, cone), count_in_cone(g, cone));
  }
}

TEST(Cone, SeveralConesFromOneEnumeration) {
  const AffineGroupElementd g(Eigen::MatrixXd::Identity(2, 2), Eigen::RowVector2d(0.31, 0.17));
  std::vector<ConeSpec> cones{ConeSpec(0.0, 1.0, 2), ConeSpec(0.0, 4.0, 2), ConeSpec(0.2, 2.0, 2)};
  const auto all = count_in_cones(g, cones);
  for (std::size_t i = 0; i < cones.size(); ++i) EXPECT_EQ(all[i], count_in_cone(g, cones[i]));
}

TEST(PointsCsv, Columns) {
  const auto p = enumerate_shell(AffineLattice::standard(Eigen::RowVector2d(0, 0)), {0.0, 1.0});
  std::ostringstream os;
  write_points_csv(os, p);
  std::istringstream is(os.str());
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  EXPECT_EQ(header, "m1,m2,x1,x2,norm");
  EXPECT_EQ(first, "-1,0,-1,0,1");
}

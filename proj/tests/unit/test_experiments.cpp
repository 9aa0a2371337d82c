#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "afflat/constants.hpp"
#include "afflat/experiments.hpp"

using namespace afflat;

namespace {

const AffineLattice kSqrtLattice =
    AffineLattice::standard(Eigen::RowVector2d(std::sqrt(2.0) - 1, std::sqrt(3.0) - 1));

CapCounts small_counts(unsigned threads, std::uint64_t seed = 3) {
  const ShellSpec sh{0.0, 60.0};
  const auto D = shell_directions(kSqrtLattice, sh);
  CapCountSpec spec{sh, {0.5, 2.0}, 2000, seed, threads};
  return sample_cap_counts(D, spec, DirectionSampler::uniform(2));
}

}  // namespace

TEST(Estimate, MeanAndStandardError) {
  const auto e = estimate_of({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(e.n, 4);
}

TEST(CapCounts, IndependentOfThreadCount) {
  const auto a = small_counts(1), b = small_counts(3);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_NE(small_counts(1, 4).counts, a.counts);
}

TEST(CapCounts, MeanCountIsSigma) {
  const auto cc = small_counts(1);
  for (int j = 0; j < 2; ++j) {
    const auto m = mean_count(cc, j);
    const double sigma = j == 0 ? 0.5 : 2.0;
    EXPECT_LT(std::abs(m.mean - sigma), 4 * m.se + 0.02 * sigma) << j;
  }
  const auto p = product_moment(cc, 0, 0);
  EXPECT_GE(p.mean, mean_count(cc, 0).mean);
}

TEST(Hypothesis, Classification) {
  const ShiftVector xi(Eigen::RowVector2d(std::sqrt(2.0) - 1, std::sqrt(3.0) - 1));
  EXPECT_EQ(check_moment_hypothesis({{1.0, 0.0}, {0.5, 3.0}}, 2, xi).kind, Hypothesis::A1);
  const auto a2 = check_moment_hypothesis({{1.5, 0.0}, {1.0, 0.0}}, 2, xi);
  EXPECT_EQ(a2.kind, Hypothesis::A2);
  EXPECT_DOUBLE_EQ(a2.eta, 2.5);
  EXPECT_NE(a2.diagnostic.find("vaguely Diophantine"), std::string::npos);
  // Negative real parts do not count towards eta.
  EXPECT_EQ(check_moment_hypothesis({{-5.0, 0.0}, {1.9, 0.0}}, 2, xi).kind, Hypothesis::A1);
  EXPECT_EQ(check_moment_hypothesis({{2.0, 0.0}, {1.0, 0.0}}, 2, xi).kind, Hypothesis::Unsupported);
}

TEST(Moments, GuardAndOverride) {
  MomentSpec spec;
  spec.sigmas = {1.0, 1.0};
  spec.z = {{2.0, 0.0}, {1.5, 0.0}};
  spec.samples = 50;
  const ShiftVector xi(kSqrtLattice.shift());
  const auto lambda = DirectionSampler::uniform(2);
  EXPECT_THROW(empirical_moment(kSqrtLattice, {0.0, 30.0}, spec, lambda, xi), UsageError);
  spec.override_guard = true;
  const auto r = empirical_moment(kSqrtLattice, {0.0, 30.0}, spec, lambda, xi);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.guard.kind, Hypothesis::Unsupported);
}

TEST(Moments, ZeroExponentsAndRestriction) {
  auto cc = small_counts(1);
  MomentSpec spec;
  spec.sigmas = {0.5, 2.0};
  spec.z = {{0.0, 0.0}, {0.0, 0.0}};
  spec.K = 0;
  const auto r = moment_from_counts(cc, spec, HypothesisCheck{});
  EXPECT_DOUBLE_EQ(r.estimate.real(), 1.0);
  EXPECT_DOUBLE_EQ(r.se_re, 0.0);
  // With K = 0 only the empty discs survive.
  long long empty = 0;
  for (Eigen::Index i = 0; i < cc.counts.rows(); ++i) empty += cc.counts.row(i).maxCoeff() == 0;
  ASSERT_TRUE(r.restricted);
  EXPECT_NEAR(r.restricted->real(), static_cast<double>(empty) / cc.counts.rows(), 1e-15);

  // (N + 1)^{i y} has modulus one.
  spec.z = {{0.0, 1.0}, {0.0, -2.0}};
  spec.K.reset();
  const auto u = moment_from_counts(cc, spec, HypothesisCheck{});
  EXPECT_LE(std::abs(u.estimate), 1.0 + 1e-12);
  EXPECT_FALSE(u.restricted);

  spec.z = {{1.0, 0.0}};
  EXPECT_THROW(moment_from_counts(cc, spec, HypothesisCheck{}), UsageError);
}

TEST(LimitDistribution, HistogramSumsToSamples) {
  const auto cc = small_counts(1);
  const auto ld = empirical_limit_distribution(cc, 3.0);
  const long long total = std::accumulate(ld.histogram.begin(), ld.histogram.end(), 0LL,
                                          [](long long s, const auto& kv) { return s + kv.second; });
  EXPECT_EQ(total, ld.samples);
  long long tail = 0;
  for (const auto& [key, n] : ld.histogram)
    if (*std::max_element(key.begin(), key.end()) > 3) tail += n;
  EXPECT_NEAR(ld.tail_mass.mean, static_cast<double>(tail) / ld.samples, 1e-15);
  ASSERT_EQ(ld.marginal_means.size(), 2u);
}

TEST(Haar, SamplesLieInFundamentalDomain) {
  std::mt19937_64 rng(9);
  HaarSamplerStats st;
  for (int i = 0; i < 500; ++i) {
    const auto g = sample_haar_d2(rng, &st);
    EXPECT_NEAR(g.matrix().determinant(), 1.0, 1e-12);
    const auto iw = iwasawa(g.matrix());
    EXPECT_GE(iw.v(0) * iw.v(0), std::sqrt(3.0) / 2 - 1e-12);
  }
  EXPECT_EQ(st.accepted, 500);
  // The fundamental domain has mass pi/3 inside a proposal strip of mass 2/sqrt3.
  EXPECT_NEAR(static_cast<double>(st.accepted) / st.proposed, std::numbers::pi * std::sqrt(3.0) / 6, 0.05);
}

TEST(Haar, ZeroFunctionAndThreads) {
  const auto zero = haar_average_d2(200, 1, 1, [](const AffineGroupElementd&) { return 0.0; });
  EXPECT_EQ(zero.mean, 0.0);
  EXPECT_EQ(zero.se, 0.0);
  auto fn = [](const AffineGroupElementd& g) { return g.shift()(0); };
  EXPECT_EQ(haar_average_d2(300, 5, 1, fn).mean, haar_average_d2(300, 5, 4, fn).mean);
}

TEST(Siegel, SmallRunAgrees) {
  const auto r = siegel_mc_check_d2(1.0, 1.0, 20000, 11, 1);
  EXPECT_DOUBLE_EQ(r.off_reference, 1.0);
  EXPECT_DOUBLE_EQ(r.diag_reference, 1.0);
  EXPECT_LT(std::abs(r.z_off), 4.0);
  EXPECT_LT(std::abs(r.z_diag), 4.0);
  EXPECT_GT(r.acceptance_rate, 0.0);
}

TEST(Escape, PsiSupport) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto y = sample_psi(PsiKind::Bump, 2, rng);
    EXPECT_LT(y.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_LE(sample_psi(PsiKind::Constant, 1, rng).cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Escape, ScanBasics) {
  EscapeScanSpec spec;
  spec.M0 = Eigen::MatrixXd::Identity(2, 2);
  spec.xi = Eigen::RowVector2d(std::cbrt(2.0) - 1, std::cbrt(4.0) - 1);
  spec.eta = 2.5;
  spec.t_list = {0.0, 4.0};
  spec.R_list = {1.0, 1e6};
  spec.samples = 300;
  const auto a = escape_scan(spec);
  ASSERT_EQ(a.cells.size(), 4u);
  EXPECT_DOUBLE_EQ(a.r, Constants::for_dimension(2).delta_d);
  // F(., 1) = 1: either s = 0 and R = 1, or the sum includes the bounded part.
  EXPECT_DOUBLE_EQ(a.cells[0].value.mean, 1.0);
  EXPECT_DOUBLE_EQ(a.cells[1].value.mean, 0.0);
  EXPECT_TRUE(a.valid);
  spec.threads = 3;
  const auto b = escape_scan(spec);
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].value.mean, b.cells[i].value.mean);

  spec.r = 10.0;
  EXPECT_THROW(escape_scan(spec), UsageError);
  spec.r = 0.0;
  spec.R_list = {0.5};
  EXPECT_THROW(escape_scan(spec), UsageError);
}

TEST(Bridge, TimeAndNoViolations) {
  EXPECT_NEAR(bridge_time(std::exp(1.0), 2), 2.0, 1e-15);
  EXPECT_NEAR(bridge_time(100.0, 3), 1.5 * std::log(100.0), 1e-13);
  BridgeSpec spec;
  spec.shell = {0.0, 40.0};
  spec.samples = 200;
  const auto r = counting_bridge_check(kSqrtLattice, spec);
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.samples, 200);
  for (std::size_t i = 0; i < r.lhs.size(); ++i) EXPECT_LE(r.lhs[i], r.rhs[i]);
}

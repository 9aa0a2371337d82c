#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "afflat/diophantine.hpp"
#include "afflat/lattice_enum.hpp"
#include "afflat/sphere_stats.hpp"

namespace afflat {

/// Sample mean with its Monte Carlo standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  long long n = 0;
};

Estimate estimate_of(const std::vector<double>& xs);

/// Directions of the shell points of L, sorted by norm.
DirectionSet shell_directions(const AffineLattice& L, const ShellSpec& shell, const EnumerationOptions& opts = {});

struct CapCountSpec {
  ShellSpec shell;
  std::vector<double> sigmas;
  long long samples = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct CapCounts {
  RowMajorMatrixXd centers;   ///< sampled directions, one per row
  RowMajorIntMatrix counts;   ///< N_{c,T}(sigma_j, v) per sample and sigma
  std::vector<double> radii;  ///< cap radius per sigma
  long long points = 0;       ///< size of the direction set
};

/// Counts in random discs centred at v ~ lambda; sample i uses its own stream.
CapCounts sample_cap_counts(const DirectionSet& D, const CapCountSpec& spec, const DirectionSampler& lambda);

Estimate mean_count(const CapCounts& cc, int j);
/// E[N_i N_j].
Estimate product_moment(const CapCounts& cc, int i, int j);

enum class Hypothesis { A1, A2, Unsupported };

struct HypothesisCheck {
  Hypothesis kind = Hypothesis::A1;
  double eta = 0.0;  ///< sum of positive real parts
  std::string diagnostic;
};

/// (A1) eta < d; (A2) eta < d + 1 with a vaguely-Diophantine diagnostic for xi.
HypothesisCheck check_moment_hypothesis(const std::vector<std::complex<double>>& z, int d, const ShiftVector& xi);

struct MomentSpec {
  std::vector<double> sigmas;
  std::vector<std::complex<double>> z;
  std::optional<long long> K;
  long long samples = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Proceed even when eta >= d + 1.
  bool override_guard = false;
};

struct MomentResult {
  std::complex<double> estimate;
  double se_re = 0.0, se_im = 0.0;
  std::optional<std::complex<double>> restricted;
  double restricted_se_re = 0.0, restricted_se_im = 0.0;
  HypothesisCheck guard;
  std::vector<std::string> warnings;
  CapCounts counts;
};

/// Monte Carlo average of prod_j (N_j + 1)^{z_j} over v ~ lambda, and of the
/// same product restricted to max_j N_j <= K.
MomentResult empirical_moment(const AffineLattice& L, const ShellSpec& shell, const MomentSpec& spec,
                              const DirectionSampler& lambda, const ShiftVector& xi_for_guard);

/// Same statistics from counts already sampled.
MomentResult moment_from_counts(CapCounts counts, const MomentSpec& spec, HypothesisCheck guard);

struct LimitDistribution {
  std::map<std::vector<long long>, long long> histogram;
  long long samples = 0;
  std::vector<Estimate> marginal_means;
  double r0 = 0.0;
  Estimate tail_mass;  ///< P(max_j N_j > r0)
};

LimitDistribution empirical_limit_distribution(const CapCounts& counts, double r0);

// ---------------------------------------------------------------------------
// Haar measure on the space of affine lattices, d = 2

struct HaarSamplerStats {
  long long accepted = 0;
  long long proposed = 0;
};

/// (M, bM) with M = n(x) a(sqrt y, 1/sqrt y) k(theta), x + iy uniform for
/// dx dy / y^2 on the modular fundamental domain, b uniform on [-1/2, 1/2)^2.
AffineGroupElementd sample_haar_d2(std::mt19937_64& rng, HaarSamplerStats* stats = nullptr);

/// Mean of fn(g) over Haar samples.
Estimate haar_average_d2(long long samples, std::uint64_t seed, unsigned threads,
                         const std::function<double(const AffineGroupElementd&)>& fn,
                         HaarSamplerStats* stats = nullptr);

struct SiegelCheckResult {
  double sigma1 = 0, sigma2 = 0;
  Estimate off_diagonal;  ///< sum_{m1 != m2} F(m1 g, m2 g)
  Estimate diagonal;      ///< sum_m F(m g, m g)
  double off_reference = 0, diag_reference = 0;
  double z_off = 0, z_diag = 0;
  double acceptance_rate = 0;
};

/// F = indicator of C_0(sigma1) x C_0(sigma2).
SiegelCheckResult siegel_mc_check_d2(double sigma1, double sigma2, long long samples, std::uint64_t seed,
                                     unsigned threads);

// ---------------------------------------------------------------------------
// Escape of mass along the horosphere

enum class PsiKind { Constant, Bump };

struct EscapeScanSpec {
  Eigen::MatrixXd M0;
  Eigen::RowVectorXd xi;
  double eta = 1.0;
  double r = 0.0;  ///< 0 selects delta_d
  std::vector<double> t_list;
  std::vector<double> R_list;
  PsiKind psi = PsiKind::Constant;
  long long samples = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct EscapeCell {
  double t, R;
  Estimate value;
};

struct EscapeScanResult {
  std::vector<EscapeCell> cells;  ///< t-major
  std::vector<long long> drops;   ///< per t
  std::vector<double> max_over_t; ///< per R
  double r = 0.0;
  bool valid = true;              ///< false when more than 1% of samples were dropped for some t
};

/// y ~ psi on [-1, 1]^{d-1}.
Eigen::RowVectorXd sample_psi(PsiKind psi, int dim, std::mt19937_64& rng);

EscapeScanResult escape_scan(const EscapeScanSpec& spec);

// ---------------------------------------------------------------------------

struct BridgeSpec {
  ShellSpec shell;
  double sigma = 1.0;
  double epsilon = 0.5;
  long long samples = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct BridgeResult {
  long long violations = 0;
  long long samples = 0;
  double t = 0.0;
  long long max_lhs = 0;
  long long max_rhs = 0;
  std::vector<long long> lhs, rhs;
  RowMajorMatrixXd centers;
};

/// Horosphere time t with T = e^{(d-1)t/d}.
double bridge_time(double T, int d);

/// Checks N_{c,T}(sigma, v) <= N((1, xi) M0 k(v) Phi_t, C_0(sigma + eps)) for
/// v uniform on the hemisphere around e1.
BridgeResult counting_bridge_check(const AffineLattice& L, const BridgeSpec& spec);

}  // namespace afflat

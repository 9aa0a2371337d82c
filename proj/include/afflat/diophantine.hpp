#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afflat/geometry.hpp"

namespace afflat {

using Rational = boost::multiprecision::cpp_rational;

/// Finite sum of q_n sqrt(n) over squarefree n with rational q_n (n = 1 is
/// the rational part). Closed under + - *, and under division by elements
/// with at most one irrational radicand.
class QuadraticSurd {
 public:
  QuadraticSurd() = default;
  QuadraticSurd(long long n) : QuadraticSurd(Rational(n)) {}  // NOLINT
  QuadraticSurd(const Rational& q);                           // NOLINT

  /// sqrt(n), n >= 0, with square factors pulled out.
  static QuadraticSurd sqrt(long long n);

  const std::map<long long, Rational>& terms() const { return terms_; }
  bool is_rational() const;
  bool is_integer() const;
  Rational rational_part() const;
  double to_double() const;
  /// Distance to the nearest integer, evaluated with 50 significant digits.
  double frac_dist() const;

  QuadraticSurd operator-() const;
  friend QuadraticSurd operator+(const QuadraticSurd& a, const QuadraticSurd& b);
  friend QuadraticSurd operator-(const QuadraticSurd& a, const QuadraticSurd& b);
  friend QuadraticSurd operator*(const QuadraticSurd& a, const QuadraticSurd& b);
  friend QuadraticSurd operator/(const QuadraticSurd& a, const QuadraticSurd& b);
  friend bool operator==(const QuadraticSurd& a, const QuadraticSurd& b) { return a.terms_ == b.terms_; }

 private:
  void add_term(long long n, const Rational& q);
  std::map<long long, Rational> terms_;
};

/// A shift xi with, per coordinate, an optional exact form used to confirm
/// suspected exact resonances.
struct ShiftVector {
  Eigen::RowVectorXd value;
  std::vector<std::optional<QuadraticSurd>> exact;

  ShiftVector() = default;
  explicit ShiftVector(Eigen::RowVectorXd v);
  explicit ShiftVector(const std::vector<QuadraticSurd>& xs);

  int dim() const { return static_cast<int>(value.size()); }
  bool fully_exact() const;
};

/// Distance from x to the nearest integer.
inline double frac_dist(double x) { return std::abs(x - std::nearbyint(x)); }

/// Values of |xi . m|_Z below this are rechecked exactly when possible.
inline constexpr double kResonanceFlag = 1e-12;

/// |xi . m|_Z by exact product splitting and compensated summation of the
/// per-term fractional parts; exact zero when a flagged value is confirmed
/// to be an exact resonance.
double dot_frac_dist(const ShiftVector& xi, const IntRowVector& m);

struct ScanLimits {
  /// Bound on (2B + 1)^d for the scanned box.
  double point_budget = 1e9;
  /// Bound on B, keeping |m| eps small.
  long long max_radius = 10000000;
};

/// Incremental scan of the sup-norm shells |m| = 1, 2, ..., tracking the
/// running minimum of |xi . m|_Z over 0 < |m| <= radius. Only one of m, -m
/// is visited.
class ShellScan {
 public:
  explicit ShellScan(ShiftVector xi, ScanLimits limits = {});

  long long radius() const { return radius_; }
  double min_dist() const { return min_; }
  const IntRowVector& argmin() const { return argmin_; }
  /// Number of values below kResonanceFlag that could not be confirmed.
  long long unconfirmed_flags() const { return unconfirmed_; }

  /// Scans the next shell; throws ResourceError past the limits.
  void advance();
  /// Scans up to radius B.
  void advance_to(long long B);
  /// Whether advancing to B stays within the limits.
  bool can_reach(long long B) const;

 private:
  ShiftVector xi_;
  ScanLimits limits_;
  long long radius_ = 0;
  double min_;
  IntRowVector argmin_;
  long long unconfirmed_ = 0;
};

/// zeta(xi, T) = min{N : min_{0 < |m| <= N} |xi . m|_Z <= 1/T}.
long long zeta(const ShiftVector& xi, double T, ScanLimits limits = {});

/// Same by exhaustive scan of the box [-N, N]^d for each N, for tests.
long long zeta_box_oracle(const ShiftVector& xi, double T);

/// Dirichlet bound ceil(T^{1/d}).
long long dirichlet_bound(double T, int d);

struct VaguelyTerm {
  int l;
  double T;
  long long zeta;
  double term;
  double partial;
};

struct VaguelyResult {
  double partial_sum = 0.0;
  std::vector<VaguelyTerm> terms;
  bool budget_exhausted = false;
  /// Trend of the last terms; never a proof of convergence or divergence.
  std::string diagnostic;
};

/// sum_{l=1}^{L_max} l^rho 2^{mu l} zeta(xi, 2^{l-1})^{-nu}.
VaguelyResult vaguely_diophantine_partial(const ShiftVector& xi, double rho, double mu, double nu, int L_max,
                                          ScanLimits limits = {});

struct BrjunoTerm {
  int n;
  long long N;
  double phi;
  double term;
  double partial;
};

struct BrjunoResult {
  std::vector<BrjunoTerm> terms;
  double partial_sum = 0.0;
  bool resonance = false;
  IntRowVector resonance_m;
  bool budget_exhausted = false;
  std::string verdict;
};

/// sum_{n=0}^{n_max} 2^{-n/s} phi(2^n), phi(N) = max_{0 < |m| <= N} log(1/|xi . m|_Z).
BrjunoResult brjuno_partial(const ShiftVector& xi, double s, int n_max, ScanLimits limits = {});

struct DiophantineProfile {
  Eigen::RowVectorXd xi;
  std::vector<std::pair<double, long long>> zeta_table;
  std::vector<std::pair<long long, double>> phi_table;
};

DiophantineProfile diophantine_profile(const ShiftVector& xi, const std::vector<double>& Ts, int n_max,
                                       ScanLimits limits = {});

/// CSV with columns T, zeta.
void write_zeta_csv(std::ostream& os, const std::vector<std::pair<double, long long>>& table);
/// CSV with columns n, N, phi, term, partial.
void write_brjuno_csv(std::ostream& os, const BrjunoResult& r);
/// CSV with columns l, T, zeta, term, partial.
void write_vaguely_csv(std::ostream& os, const VaguelyResult& r);

}  // namespace afflat

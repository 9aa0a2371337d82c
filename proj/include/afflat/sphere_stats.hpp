#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include "afflat/lattice_enum.hpp"

namespace afflat {

/// Unit vectors in listed order, with the norms of the points they came from.
struct DirectionSet {
  RowMajorMatrixXd dirs;
  Eigen::VectorXd norms;

  Eigen::Index size() const { return dirs.rows(); }
  int dim() const { return static_cast<int>(dirs.cols()); }
};

/// Normalizes points already sorted by norm; order and multiplicity are kept.
DirectionSet directions_of(const ShellPoints& pts);
DirectionSet directions_of(const RowMajorMatrixXd& points);

/// Angle between unit vectors as 2 atan2(|u - v|, |u + v|): accurate near 0
/// and pi, and bitwise symmetric in (u, v).
template <typename A, typename B>
double geodesic_distance(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  double diff = 0.0, sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = u(i), b = v(i);
    diff += (a - b) * (a - b);
    sum += (a + b) * (a + b);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

/// Area of a geodesic cap of angular radius theta on S^{d-1}.
double cap_area(double theta, int d);

/// Inverse of cap_area on [0, pi].
double cap_radius_for_area(double area, int d);

/// Radius of the disc of area sigma d T^{-d} / (1 - c^d).
double cap_radius_for_sigma(double sigma, double c, double T, int d);

/// Open disc {v : dist(v, center) < angular_radius}.
struct CapSpec {
  Eigen::RowVectorXd center;
  double angular_radius = 0.0;

  CapSpec() = default;
  CapSpec(Eigen::RowVectorXd c, double theta);

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& v) const {
    return geodesic_distance(v, center) < angular_radius;
  }
};

/// N(cap) by linear scan.
long long count_in_cap(const DirectionSet& D, const CapSpec& cap);

/// Uniform grid on the ambient cube [-1, 1]^d with cell side at least the
/// chord of `max_angle`; occupied cells are kept as sorted packed keys.
class DirectionIndex {
 public:
  DirectionIndex(const DirectionSet& D, double max_angle);

  double max_angle() const { return max_angle_; }

  /// Same result as count_in_cap(D, cap); falls back to the linear scan
  /// when the cap is wider than max_angle.
  long long count_in_cap(const CapSpec& cap) const;

  /// Calls fn(i, j) for every unordered pair i < j whose cells are adjacent;
  /// every pair at angle <= max_angle is among them. Points i in [lo, hi).
  void visit_candidate_pairs(std::size_t lo, std::size_t hi,
                             const std::function<void(std::size_t, std::size_t)>& fn) const;

 private:
  std::uint64_t key_of(const std::vector<long long>& cell) const;
  void cell_of(Eigen::Index i, std::vector<long long>& cell) const;
  template <typename Fn>
  void visit_neighbour_cells(const std::vector<long long>& cell, Fn&& fn) const;

  const DirectionSet* D_;
  double max_angle_;
  double side_;
  long long cells_per_axis_;
  std::vector<std::uint64_t> keys_;        // occupied cell keys, sorted
  std::vector<std::size_t> starts_;        // ranges into order_, size keys_+1
  std::vector<std::size_t> order_;         // point indices grouped by cell
  std::vector<std::uint64_t> point_key_;   // key of each point
};

/// cd_norm N^{1/(d-1)}: factor turning angles into the scale of the
/// pair-correlation variable s.
double pair_scale(int d, Eigen::Index N);

struct PairCorrelationResult {
  std::vector<double> s_grid;
  std::vector<double> values;
  std::vector<double> poisson_reference;
  std::vector<long long> ordered_pairs;
  long long N = 0;
  int d = 0;
};

/// R^2_N(s) = (1/N) #{ordered j1 != j2 : scale dist <= s}, indexed path.
PairCorrelationResult pair_correlation(const DirectionSet& D, const std::vector<double>& s_grid,
                                       unsigned threads = 1);

/// O(N^2) reference.
PairCorrelationResult pair_correlation_bruteforce(const DirectionSet& D, const std::vector<double>& s_grid);

/// Calls fn(i, j, s) for every unordered pair i < j with scaled distance
/// s <= s_max.
void visit_close_pairs(const DirectionSet& D, double s_max,
                       const std::function<void(Eigen::Index, Eigen::Index, double)>& fn);

using PairTestFunction =
    std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&, double)>;

/// (1/N) sum_{j1 != j2} f(v_j1, v_j2, scaled dist); f must vanish for s > support.
double pair_correlation_f(const DirectionSet& D, const PairTestFunction& f, double support);

/// Measurable subset of the sphere given by a membership test.
struct SphereRegion {
  std::function<bool(const Eigen::RowVectorXd&)> contains;
  double area_fraction = 1.0;

  static SphereRegion whole(int d);
  static SphereRegion cap(const CapSpec& cap);
  /// {v : v . axis > 0}.
  static SphereRegion hemisphere(const Eigen::RowVectorXd& axis);
  /// Union of pairwise disjoint caps.
  static SphereRegion caps(const std::vector<CapSpec>& caps);
};

/// (1/N) #{ordered j1 != j2 : v_j1 in D1, v_j2 in D2, scaled dist <= s}.
double pair_correlation_restricted(const DirectionSet& D, const SphereRegion& D1, const SphereRegion& D2, double s);

/// Absolutely continuous distributions on the sphere.
class DirectionSampler {
 public:
  using Density = std::function<double(const Eigen::RowVectorXd&)>;

  static DirectionSampler uniform(int d);
  static DirectionSampler hemisphere(const Eigen::RowVectorXd& axis);
  /// Rejection sampling against uniform; density <= bound everywhere.
  static DirectionSampler density(int d, Density f, double bound);

  int dim() const { return d_; }
  Eigen::RowVectorXd sample(std::mt19937_64& rng) const;

 private:
  explicit DirectionSampler(int d) : d_(d) {}
  int d_;
  Eigen::RowVectorXd axis_;
  Density density_;
  double bound_ = 0.0;
};

/// CSV with columns s, R2, poisson_ref.
void write_pair_correlation_csv(std::ostream& os, const PairCorrelationResult& r);

/// CSV with columns v1..vd, count.
void write_cap_counts_csv(std::ostream& os, const RowMajorMatrixXd& centers, const std::vector<long long>& counts);

}  // namespace afflat

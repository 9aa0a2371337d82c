#include "afflat/sphere_stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>
#include <numbers>
#include <ostream>

#include "afflat/constants.hpp"
#include "afflat/csv.hpp"
#include "afflat/errors.hpp"
#include "afflat/rng.hpp"

namespace afflat {

DirectionSet directions_of(const RowMajorMatrixXd& points) {
  DirectionSet D;
  D.dirs.resize(points.rows(), points.cols());
  D.norms.resize(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double r = points.row(i).norm();
    if (!(r > 0.0)) throw DomainError("directions_of: zero vector at index " + std::to_string(i));
    D.dirs.row(i) = points.row(i) / r;
    D.norms(i) = r;
  }
  return D;
}

DirectionSet directions_of(const ShellPoints& pts) { return directions_of(pts.x); }

double cap_area(double theta, int d) {
  if (d < 2) throw UsageError("cap_area: dimension must be >= 2");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw DomainError("cap_area: radius must lie in [0, pi]");
  if (d == 2) return 2.0 * theta;
  if (d == 3) {
    const double h = std::sin(0.5 * theta);
    return 4.0 * std::numbers::pi * h * h;
  }
  // int_0^theta sin^{d-2} = B_{sin^2 theta}((d-1)/2, 1/2) / 2 on [0, pi/2].
  const double a = 0.5 * (d - 1);
  const double s = std::sin(theta);
  const double half = 0.5 * boost::math::beta(a, 0.5, s * s);
  const double integral = theta <= 0.5 * std::numbers::pi ? half : boost::math::beta(a, 0.5) - half;
  return sphere_volume(d - 1) * integral;
}

double cap_radius_for_area(double area, int d) {
  if (d < 2) throw UsageError("cap_radius_for_area: dimension must be >= 2");
  const double total = sphere_volume(d);
  if (!(area >= 0.0)) throw DomainError("cap radius: area must be non-negative");
  if (area > total * (1.0 + 1e-15)) throw DomainError("cap radius: area exceeds the sphere area");
  area = std::min(area, total);
  if (d == 2) return 0.5 * area;
  if (d == 3) return 2.0 * std::asin(std::min(1.0, std::sqrt(area / (4.0 * std::numbers::pi))));
  if (area == 0.0) return 0.0;
  std::uintmax_t iters = 200;
  auto f = [&](double t) { return cap_area(t, d) - area; };
  const auto r = boost::math::tools::toms748_solve(f, 0.0, std::numbers::pi, -area, total - area,
                                                    boost::math::tools::eps_tolerance<double>(48), iters);
  return 0.5 * (r.first + r.second);
}

double cap_radius_for_sigma(double sigma, double c, double T, int d) {
  if (!(sigma > 0.0)) throw UsageError("cap radius: sigma must be positive");
  if (!(c >= 0.0 && c < 1.0)) throw UsageError("cap radius: c must lie in [0, 1)");
  if (!(T > 0.0)) throw UsageError("cap radius: T must be positive");
  const double area = sigma * d * std::pow(T, -d) / (1.0 - std::pow(c, d));
  if (area > sphere_volume(d)) throw DomainError("cap radius: target area exceeds the sphere area");
  return cap_radius_for_area(area, d);
}

CapSpec::CapSpec(Eigen::RowVectorXd c, double theta) : center(std::move(c)), angular_radius(theta) {
  if (!(std::abs(center.norm() - 1.0) <= 1e-9)) throw DomainError("cap: center is not a unit vector");
  if (!(theta > 0.0 && theta < std::numbers::pi)) throw DomainError("cap: radius must lie in (0, pi)");
}

long long count_in_cap(const DirectionSet& D, const CapSpec& cap) {
  long long n = 0;
  for (Eigen::Index i = 0; i < D.size(); ++i)
    if (cap.contains(D.dirs.row(i))) ++n;
  return n;
}

// ---------------------------------------------------------------------------

DirectionIndex::DirectionIndex(const DirectionSet& D, double max_angle) : D_(&D), max_angle_(max_angle) {
  if (!(max_angle >= 0.0)) throw UsageError("DirectionIndex: angle must be non-negative");
  const int d = D.dim();
  const double chord = 2.0 * std::sin(0.5 * std::min(max_angle, std::numbers::pi));
  const double needed = chord * (1.0 + 1e-9) + 1e-12;
  // Keep n^d below 2^62 so keys pack into 64 bits.
  const auto max_cells = static_cast<long long>(std::floor(std::pow(2.0, 62.0 / std::max(d, 1))));
  cells_per_axis_ = std::clamp<long long>(static_cast<long long>(std::floor(2.0 / needed)), 1, max_cells);
  side_ = 2.0 / static_cast<double>(cells_per_axis_);

  const auto n = static_cast<std::size_t>(D.size());
  point_key_.resize(n);
  std::vector<long long> cell(d);
  for (std::size_t i = 0; i < n; ++i) {
    cell_of(static_cast<Eigen::Index>(i), cell);
    point_key_[i] = key_of(cell);
  }
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return point_key_[a] < point_key_[b]; });
  for (std::size_t r = 0; r < n; ++r) {
    if (r == 0 || point_key_[order_[r]] != keys_.back()) {
      keys_.push_back(point_key_[order_[r]]);
      starts_.push_back(r);
    }
  }
  starts_.push_back(n);
}

void DirectionIndex::cell_of(Eigen::Index i, std::vector<long long>& cell) const {
  for (int k = 0; k < D_->dim(); ++k) {
    const auto c = static_cast<long long>(std::floor((D_->dirs(i, k) + 1.0) / side_));
    cell[k] = std::clamp<long long>(c, 0, cells_per_axis_ - 1);
  }
}

std::uint64_t DirectionIndex::key_of(const std::vector<long long>& cell) const {
  std::uint64_t key = 0;
  for (auto it = cell.rbegin(); it != cell.rend(); ++it)
    key = key * static_cast<std::uint64_t>(cells_per_axis_) + static_cast<std::uint64_t>(*it);
  return key;
}

template <typename Fn>
void DirectionIndex::visit_neighbour_cells(const std::vector<long long>& cell, Fn&& fn) const {
  const int d = static_cast<int>(cell.size());
  std::vector<int> offset(d, -1);
  std::vector<long long> nb(d);
  for (;;) {
    bool inside = true;
    for (int k = 0; k < d; ++k) {
      nb[k] = cell[k] + offset[k];
      if (nb[k] < 0 || nb[k] >= cells_per_axis_) inside = false;
    }
    if (inside) {
      const auto key = key_of(nb);
      const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
      if (it != keys_.end() && *it == key) {
        const auto c = static_cast<std::size_t>(it - keys_.begin());
        fn(starts_[c], starts_[c + 1]);
      }
    }
    int k = 0;
    while (k < d && offset[k] == 1) offset[k++] = -1;
    if (k == d) break;
    ++offset[k];
  }
}

long long DirectionIndex::count_in_cap(const CapSpec& cap) const {
  if (cap.angular_radius > max_angle_) return afflat::count_in_cap(*D_, cap);
  const int d = D_->dim();
  std::vector<long long> cell(d);
  for (int k = 0; k < d; ++k) {
    const auto c = static_cast<long long>(std::floor((cap.center(k) + 1.0) / side_));
    cell[k] = std::clamp<long long>(c, 0, cells_per_axis_ - 1);
  }
  long long n = 0;
  visit_neighbour_cells(cell, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r)
      if (cap.contains(D_->dirs.row(static_cast<Eigen::Index>(order_[r])))) ++n;
  });
  return n;
}

void DirectionIndex::visit_candidate_pairs(std::size_t lo, std::size_t hi,
                                           const std::function<void(std::size_t, std::size_t)>& fn) const {
  std::vector<long long> cell(D_->dim());
  for (std::size_t i = lo; i < hi; ++i) {
    cell_of(static_cast<Eigen::Index>(i), cell);
    visit_neighbour_cells(cell, [&](std::size_t a, std::size_t b) {
      for (std::size_t r = a; r < b; ++r)
        if (order_[r] > i) fn(i, order_[r]);
    });
  }
}

// ---------------------------------------------------------------------------

double pair_scale(int d, Eigen::Index N) {
  return Constants::for_dimension(d).cd_norm * std::pow(static_cast<double>(N), 1.0 / (d - 1));
}

namespace {

void check_grid(const std::vector<double>& s_grid) {
  if (s_grid.empty()) throw UsageError("pair correlation: empty s grid");
  for (double s : s_grid)
    if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("pair correlation: s values must be positive");
}

PairCorrelationResult finish(const DirectionSet& D, const std::vector<double>& s_grid, std::vector<double>& dists) {
  std::sort(dists.begin(), dists.end());
  PairCorrelationResult r;
  r.s_grid = s_grid;
  r.N = D.size();
  r.d = D.dim();
  for (double s : s_grid) {
    const auto unordered = static_cast<long long>(std::upper_bound(dists.begin(), dists.end(), s) - dists.begin());
    r.ordered_pairs.push_back(2 * unordered);
    r.values.push_back(2.0 * static_cast<double>(unordered) / static_cast<double>(r.N));
    r.poisson_reference.push_back(poisson_pair_reference(s, r.d));
  }
  return r;
}

double max_scaled(const DirectionSet& D, const std::vector<double>& s_grid) {
  if (D.size() < 2) throw DomainError("pair correlation: need at least two directions");
  check_grid(s_grid);
  const double s_max = *std::max_element(s_grid.begin(), s_grid.end());
  if (s_max > std::numbers::pi * pair_scale(D.dim(), D.size()))
    throw DomainError("pair correlation: cutoff exceeds the sphere diameter");
  return s_max;
}

}  // namespace

PairCorrelationResult pair_correlation(const DirectionSet& D, const std::vector<double>& s_grid, unsigned threads) {
  const double s_max = max_scaled(D, s_grid);
  const double scale = pair_scale(D.dim(), D.size());
  const DirectionIndex index(D, s_max / scale);
  const auto n = static_cast<std::size_t>(D.size());
  const std::size_t blocks = std::max<std::size_t>(1, std::min<std::size_t>(n, 4 * std::max(1u, threads)));
  std::vector<std::vector<double>> parts(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    index.visit_candidate_pairs(n * b / blocks, n * (b + 1) / blocks, [&](std::size_t i, std::size_t j) {
      const double s = scale * geodesic_distance(D.dirs.row(static_cast<Eigen::Index>(i)),
                                                 D.dirs.row(static_cast<Eigen::Index>(j)));
      if (s <= s_max) parts[b].push_back(s);
    });
  });
  std::vector<double> dists;
  for (auto& p : parts) dists.insert(dists.end(), p.begin(), p.end());
  return finish(D, s_grid, dists);
}

PairCorrelationResult pair_correlation_bruteforce(const DirectionSet& D, const std::vector<double>& s_grid) {
  const double s_max = max_scaled(D, s_grid);
  const double scale = pair_scale(D.dim(), D.size());
  std::vector<double> dists;
  for (Eigen::Index i = 0; i < D.size(); ++i)
    for (Eigen::Index j = i + 1; j < D.size(); ++j) {
      const double s = scale * geodesic_distance(D.dirs.row(i), D.dirs.row(j));
      if (s <= s_max) dists.push_back(s);
    }
  return finish(D, s_grid, dists);
}

void visit_close_pairs(const DirectionSet& D, double s_max,
                       const std::function<void(Eigen::Index, Eigen::Index, double)>& fn) {
  if (D.size() < 2) throw DomainError("pair correlation: need at least two directions");
  if (!(s_max >= 0.0) || !std::isfinite(s_max)) throw DomainError("pair correlation: support must be bounded");
  const double scale = pair_scale(D.dim(), D.size());
  const DirectionIndex index(D, std::min(s_max / scale, std::numbers::pi));
  index.visit_candidate_pairs(0, static_cast<std::size_t>(D.size()), [&](std::size_t i, std::size_t j) {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    const double s = scale * geodesic_distance(D.dirs.row(a), D.dirs.row(b));
    if (s <= s_max) fn(a, b, s);
  });
}

double pair_correlation_f(const DirectionSet& D, const PairTestFunction& f, double support) {
  double total = 0.0;
  Eigen::RowVectorXd u, v;
  visit_close_pairs(D, support, [&](Eigen::Index i, Eigen::Index j, double s) {
    u = D.dirs.row(i);
    v = D.dirs.row(j);
    total += f(u, v, s) + f(v, u, s);
  });
  return total / static_cast<double>(D.size());
}

SphereRegion SphereRegion::whole(int) { return {[](const Eigen::RowVectorXd&) { return true; }, 1.0}; }

SphereRegion SphereRegion::cap(const CapSpec& c) {
  const int d = static_cast<int>(c.center.size());
  return {[c](const Eigen::RowVectorXd& v) { return c.contains(v); },
          cap_area(c.angular_radius, d) / sphere_volume(d)};
}

SphereRegion SphereRegion::hemisphere(const Eigen::RowVectorXd& axis) {
  return {[axis](const Eigen::RowVectorXd& v) { return v.dot(axis) > 0.0; }, 0.5};
}

SphereRegion SphereRegion::caps(const std::vector<CapSpec>& cs) {
  double fraction = 0.0;
  for (const auto& c : cs) fraction += cap_area(c.angular_radius, static_cast<int>(c.center.size())) /
                                       sphere_volume(static_cast<int>(c.center.size()));
  return {[cs](const Eigen::RowVectorXd& v) {
            return std::any_of(cs.begin(), cs.end(), [&](const CapSpec& c) { return c.contains(v); });
          },
          fraction};
}

double pair_correlation_restricted(const DirectionSet& D, const SphereRegion& D1, const SphereRegion& D2, double s) {
  if (!(s > 0.0)) throw UsageError("pair correlation: s must be positive");
  if (s > std::numbers::pi * pair_scale(D.dim(), std::max<Eigen::Index>(D.size(), 2)))
    throw DomainError("pair correlation: cutoff exceeds the sphere diameter");
  std::vector<char> in1(D.size()), in2(D.size());
  Eigen::RowVectorXd v;
  for (Eigen::Index i = 0; i < D.size(); ++i) {
    v = D.dirs.row(i);
    in1[i] = D1.contains(v);
    in2[i] = D2.contains(v);
  }
  long long ordered = 0;
  visit_close_pairs(D, s, [&](Eigen::Index i, Eigen::Index j, double) {
    ordered += (in1[i] && in2[j]) + (in1[j] && in2[i]);
  });
  return static_cast<double>(ordered) / static_cast<double>(D.size());
}

// ---------------------------------------------------------------------------

DirectionSampler DirectionSampler::uniform(int d) {
  if (d < 2) throw UsageError("sampler: dimension must be >= 2");
  return DirectionSampler(d);
}

DirectionSampler DirectionSampler::hemisphere(const Eigen::RowVectorXd& axis) {
  DirectionSampler s = uniform(static_cast<int>(axis.size()));
  if (!(axis.norm() > 0.0)) throw DomainError("sampler: hemisphere axis is zero");
  s.axis_ = axis.normalized();
  return s;
}

DirectionSampler DirectionSampler::density(int d, Density f, double bound) {
  DirectionSampler s = uniform(d);
  if (!(bound > 0.0)) throw UsageError("sampler: density bound must be positive");
  s.density_ = std::move(f);
  s.bound_ = bound;
  return s;
}

Eigen::RowVectorXd DirectionSampler::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Eigen::RowVectorXd v(d_);
  for (long attempt = 0; attempt < 10000000; ++attempt) {
    for (int k = 0; k < d_; ++k) v(k) = normal(rng);
    const double r = v.norm();
    if (!(r > 1e-12)) continue;
    v /= r;
    if (axis_.size() != 0) {
      const double t = v.dot(axis_);
      if (t == 0.0) continue;
      if (t < 0.0) v = -v;
    }
    if (density_) {
      const double fv = density_(v);
      if (fv > bound_) throw NumericError("sampler: density exceeds its stated bound");
      if (unif(rng) * bound_ > fv) continue;
    }
    return v;
  }
  throw ResourceError("sampler: rejection sampling did not accept a point");
}

void write_pair_correlation_csv(std::ostream& os, const PairCorrelationResult& r) {
  CsvWriter w(os);
  w.header({"s", "R2", "poisson_ref"});
  for (std::size_t i = 0; i < r.s_grid.size(); ++i) {
    w.field(r.s_grid[i]).field(r.values[i]).field(r.poisson_reference[i]);
    w.end_row();
  }
}

void write_cap_counts_csv(std::ostream& os, const RowMajorMatrixXd& centers, const std::vector<long long>& counts) {
  CsvWriter w(os);
  std::vector<std::string> cols;
  for (Eigen::Index k = 0; k < centers.cols(); ++k) cols.push_back("v" + std::to_string(k + 1));
  cols.push_back("count");
  w.header(cols);
  for (Eigen::Index i = 0; i < centers.rows(); ++i) {
    for (Eigen::Index k = 0; k < centers.cols(); ++k) w.field(centers(i, k));
    w.field(counts[static_cast<std::size_t>(i)]);
    w.end_row();
  }
}

}  // namespace afflat

#include "afflat/lattice_enum.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numeric>
#include <ostream>

#include "afflat/constants.hpp"
#include "afflat/csv.hpp"

namespace afflat {

namespace {

// Hard cap on visited points, independent of the volume estimate (a very
// skewed affine lattice can put far more points in a ball than its volume).
constexpr double kVisitCap = 5e8;

double expected_ball_count(int d, double radius) { return ball_volume(d) * std::pow(radius, d); }

struct Collected {
  std::vector<long long> m;
  std::vector<double> x;
  std::vector<double> norm;
};

ShellPoints to_sorted_points(Collected&& c, int d) {
  const std::size_t n = c.norm.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (c.norm[a] != c.norm[b]) return c.norm[a] < c.norm[b];
    return std::lexicographical_compare(c.m.begin() + a * d, c.m.begin() + (a + 1) * d, c.m.begin() + b * d,
                                        c.m.begin() + (b + 1) * d);
  });
  ShellPoints out;
  out.m.resize(static_cast<Eigen::Index>(n), d);
  out.x.resize(static_cast<Eigen::Index>(n), d);
  out.norm.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order[r];
    for (int j = 0; j < d; ++j) {
      out.m(r, j) = c.m[i * d + j];
      out.x(r, j) = c.x[i * d + j];
    }
    out.norm(r) = c.norm[i];
  }
  return out;
}

}  // namespace

AffineLattice::AffineLattice(Eigen::MatrixXd M0, Eigen::RowVectorXd xi) : M0_(std::move(M0)), xi_(std::move(xi)) {
  detail::require_special_linear(M0_, "AffineLattice");
  if (M0_.rows() < 2) throw UsageError("AffineLattice: dimension must be >= 2");
  if (xi_.size() != M0_.rows()) throw UsageError("AffineLattice: shift has wrong dimension");
}

AffineLattice AffineLattice::standard(Eigen::RowVectorXd xi) {
  const auto d = xi.size();
  return AffineLattice(Eigen::MatrixXd::Identity(d, d), std::move(xi));
}

AffineGroupElementd AffineLattice::as_group_element() const { return AffineGroupElementd(M0_, xi_ * M0_); }

void ShellSpec::validate() const {
  if (!(c >= 0.0 && c < 1.0)) throw UsageError("shell: c must lie in [0, 1)");
  if (!(T > 0.0)) throw UsageError("shell: T must be positive");
}

double ShellSpec::volume(int d) const { return (1.0 - std::pow(c, d)) / d * sphere_volume(d) * std::pow(T, d); }

ConeSpec::ConeSpec(double c, double sigma, int d) : c_(c), sigma_(sigma), d_(d) {
  if (d < 2) throw UsageError("cone: dimension must be >= 2");
  if (!(c >= 0.0 && c < 1.0)) throw UsageError("cone: c must lie in [0, 1)");
  if (!(sigma > 0.0)) throw UsageError("cone: sigma must be positive");
  rho_ = std::pow(sigma * d / ((1.0 - std::pow(c, d)) * ball_volume(d - 1)), 1.0 / (d - 1));
}

double ConeSpec::volume_quadrature() const {
  const double section = ball_volume(d_ - 1);
  auto area = [&](double x1) { return section * std::pow(rho_ * x1, d_ - 1); };
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(area, c_, 1.0);
}

void visit_ball(const SiegelCoordinates<double>& sc, double radius,
                const std::function<void(const IntRowVector&, const Eigen::RowVectorXd&)>& fn,
                const EnumerationOptions& opts) {
  const int d = sc.dim();
  if (!(radius >= 0.0)) throw UsageError("visit_ball: radius must be non-negative");
  if (expected_ball_count(d, radius) > opts.budget) {
    throw ResourceError("enumeration: expected point count " + format_double(expected_ball_count(d, radius)) +
                        " exceeds budget " + format_double(opts.budget));
  }
  const Eigen::MatrixXd R = sc.iwasawa.na();
  const Eigen::RowVectorXd& beta = sc.b;
  const double reff = radius * (1.0 + 1e-9) + 1e-12;
  const double r2 = reff * reff;

  IntRowVector m = IntRowVector::Zero(d);
  Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(d);
  Eigen::RowVectorXd x(d);
  double visits = 0;

  auto recurse = [&](auto&& self, int j, double partial) -> void {
    double s = 0.0;
    for (int i = 0; i < j; ++i) s += y(i) * R(i, j);
    const double vj = R(j, j);
    const double center = -beta(j) - s / vj;
    const double half = std::sqrt(std::max(0.0, r2 - partial)) / vj;
    const auto lo = static_cast<long long>(std::ceil(center - half));
    const auto hi = static_cast<long long>(std::floor(center + half));
    for (long long mj = lo; mj <= hi; ++mj) {
      const double yj = static_cast<double>(mj) + beta(j);
      const double comp = yj * vj + s;
      const double p = partial + comp * comp;
      if (p > r2) continue;
      m(j) = mj;
      y(j) = yj;
      if (j + 1 == d) {
        if (++visits > kVisitCap) throw ResourceError("enumeration: visited-point cap exceeded");
        x.noalias() = y * sc.reduced;
        fn(m, x);
      } else {
        self(self, j + 1, p);
      }
    }
  };
  recurse(recurse, 0, 0.0);
}

ShellPoints enumerate_shell(const AffineLattice& L, const ShellSpec& shell, const EnumerationOptions& opts) {
  shell.validate();
  const int d = L.dim();
  const auto sc = siegel_reduce(L.as_group_element());
  // Original coordinates: m = mprime gamma + z with z = b gamma - xi integral.
  const Eigen::MatrixXd gamma = sc.gamma.cast<double>();
  const Eigen::RowVectorXd zf = sc.b * gamma - L.shift();
  IntRowVector z(d);
  for (int j = 0; j < d; ++j) z(j) = std::llround(zf(j));

  // Checked here too so that the reservation below stays within budget.
  if (expected_ball_count(d, shell.T) > opts.budget)
    throw ResourceError("enumeration: expected point count " + format_double(expected_ball_count(d, shell.T)) +
                        " exceeds budget " + format_double(opts.budget));
  Collected col;
  const auto expected = static_cast<std::size_t>(shell.volume(d) * 1.05 + 16);
  col.norm.reserve(expected);
  col.m.reserve(expected * d);
  col.x.reserve(expected * d);

  Eigen::RowVectorXd mo(d), xo(d);
  IntRowVector mi(d);
  visit_ball(
      sc, shell.T,
      [&](const IntRowVector& mp, const Eigen::RowVectorXd&) {
        mi = mp * sc.gamma + z;
        mo = mi.cast<double>() + L.shift();
        xo.noalias() = mo * L.basis();
        const double r = xo.norm();
        if (r == 0.0 || !shell.contains_norm(r)) return;
        for (int j = 0; j < d; ++j) {
          col.m.push_back(mi(j));
          col.x.push_back(xo(j));
        }
        col.norm.push_back(r);
      },
      opts);
  return to_sorted_points(std::move(col), d);
}

long long count_in_region(const AffineGroupElementd& g, const std::function<bool(const Eigen::RowVectorXd&)>& inside,
                          double sup_norm) {
  const auto sc = siegel_reduce(g);
  long long n = 0;
  visit_ball(sc, sup_norm, [&](const IntRowVector&, const Eigen::RowVectorXd& x) {
    if (inside(x)) ++n;
  });
  return n;
}

long long count_in_cone(const AffineGroupElementd& g, const ConeSpec& cone) {
  if (cone.dim() != g.dim()) throw UsageError("count_in_cone: dimension mismatch");
  return count_in_region(g, [&](const Eigen::RowVectorXd& x) { return cone.contains(x); }, cone.sup_norm());
}

std::vector<long long> count_in_cones(const AffineGroupElementd& g, const std::vector<ConeSpec>& cones) {
  std::vector<long long> counts(cones.size(), 0);
  if (cones.empty()) return counts;
  double radius = 0.0;
  for (const auto& c : cones) {
    if (c.dim() != g.dim()) throw UsageError("count_in_cones: dimension mismatch");
    radius = std::max(radius, c.sup_norm());
  }
  const auto sc = siegel_reduce(g);
  visit_ball(sc, radius, [&](const IntRowVector&, const Eigen::RowVectorXd& x) {
    for (std::size_t i = 0; i < cones.size(); ++i)
      if (cones[i].contains(x)) ++counts[i];
  });
  return counts;
}

namespace {

template <typename PointOf>
ShellPoints box_scan(int d, int box_radius, PointOf&& point_of,
                     const std::function<bool(const Eigen::RowVectorXd&)>& inside) {
  if (box_radius < 0 || box_radius > 10) throw ResourceError("brute_force_oracle: box radius must lie in [0, 10]");
  Collected col;
  IntRowVector m = IntRowVector::Constant(d, -box_radius);
  for (;;) {
    const Eigen::RowVectorXd x = point_of(m);
    if (inside(x)) {
      for (int j = 0; j < d; ++j) {
        col.m.push_back(m(j));
        col.x.push_back(x(j));
      }
      col.norm.push_back(x.norm());
    }
    int j = d - 1;
    while (j >= 0 && m(j) == box_radius) {
      m(j) = -box_radius;
      --j;
    }
    if (j < 0) break;
    ++m(j);
  }
  return to_sorted_points(std::move(col), d);
}

}  // namespace

ShellPoints brute_force_oracle(const AffineGroupElementd& g,
                               const std::function<bool(const Eigen::RowVectorXd&)>& inside, int box_radius) {
  return box_scan(
      g.dim(), box_radius, [&](const IntRowVector& m) { return g.act(m.cast<double>()); }, inside);
}

ShellPoints brute_force_oracle(const AffineLattice& L, const std::function<bool(const Eigen::RowVectorXd&)>& inside,
                               int box_radius) {
  return box_scan(
      L.dim(), box_radius,
      [&](const IntRowVector& m) { return Eigen::RowVectorXd((m.cast<double>() + L.shift()) * L.basis()); }, inside);
}

double lemma31_bound(const AffineGroupElementd& g, const ConeSpec& cone, double eta) {
  return lemma31_bound(g, cone.sup_norm(), eta);
}

void write_points_csv(std::ostream& os, const ShellPoints& pts) {
  CsvWriter w(os);
  const auto d = pts.m.cols();
  std::vector<std::string> cols;
  for (Eigen::Index j = 0; j < d; ++j) cols.push_back("m" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < d; ++j) cols.push_back("x" + std::to_string(j + 1));
  cols.push_back("norm");
  w.header(cols);
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) w.field(pts.m(i, j));
    for (Eigen::Index j = 0; j < d; ++j) w.field(pts.x(i, j));
    w.field(pts.norm(i));
    w.end_row();
  }
}

}  // namespace afflat

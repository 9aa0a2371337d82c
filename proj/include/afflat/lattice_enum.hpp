#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iosfwd>
#include <vector>

#include "afflat/geometry.hpp"

namespace afflat {

using RowMajorMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMajorIntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The affine lattice (Z^d + xi) M0, det M0 = 1.
class AffineLattice {
 public:
  AffineLattice(Eigen::MatrixXd M0, Eigen::RowVectorXd xi);

  /// Z^d + xi.
  static AffineLattice standard(Eigen::RowVectorXd xi);

  int dim() const { return static_cast<int>(M0_.rows()); }
  const Eigen::MatrixXd& basis() const { return M0_; }
  const Eigen::RowVectorXd& shift() const { return xi_; }

  /// (1, xi)(M0, 0) = (M0, xi M0); its orbit Z^d g is the point set.
  AffineGroupElementd as_group_element() const;

 private:
  Eigen::MatrixXd M0_;
  Eigen::RowVectorXd xi_;
};

/// Shell cT <= ||x|| <= T.
struct ShellSpec {
  double c = 0.0;
  double T = 1.0;

  void validate() const;
  bool contains_norm(double r) const { return c * T <= r && r <= T; }
  /// Lebesgue volume (1 - c^d)/d V_{S^{d-1}} T^d.
  double volume(int d) const;
};

/// Solid cone {(x1, x') : c < x1 <= 1, ||x'|| < rho x1} around e1, with rho
/// chosen so that the volume is sigma.
class ConeSpec {
 public:
  ConeSpec(double c, double sigma, int d);

  double c() const { return c_; }
  double sigma() const { return sigma_; }
  int dim() const { return d_; }
  /// Opening ratio rho: rho^{d-1} = sigma d / ((1 - c^d) V_{B^{d-1}}).
  double rho() const { return rho_; }
  /// sup ||x|| over the cone.
  double sup_norm() const { return std::sqrt(1.0 + rho_ * rho_); }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    const double x1 = x(0);
    if (!(x1 > c_ && x1 <= 1.0)) return false;
    return x.tail(x.size() - 1).norm() < rho_ * x1;
  }

  /// Volume by Gauss-Kronrod quadrature of the cross-sections.
  double volume_quadrature() const;

 private:
  double c_, sigma_, rho_;
  int d_;
};

/// Points of an affine lattice with their integer coordinates.
struct ShellPoints {
  RowMajorIntMatrix m;  ///< integer coordinates, one row per point
  RowMajorMatrixXd x;   ///< positions in R^d
  Eigen::VectorXd norm;

  Eigen::Index size() const { return norm.size(); }
};

struct EnumerationOptions {
  /// Upper bound on the volume-estimated number of points.
  double budget = 1e8;
};

/// All y in (Z^d + xi) M0 with cT <= ||y|| <= T, y != 0, sorted by norm and
/// then lexicographically by integer coordinate.
ShellPoints enumerate_shell(const AffineLattice& L, const ShellSpec& shell, const EnumerationOptions& opts = {});

/// Visits every m in Z^d with ||m.g|| <= radius, in reduced coordinates:
/// fn(mprime, x) receives the coefficient vector on `sc.reduced` and the
/// point x = (mprime + sc.b) sc.reduced.
void visit_ball(const SiegelCoordinates<double>& sc, double radius,
                const std::function<void(const IntRowVector&, const Eigen::RowVectorXd&)>& fn,
                const EnumerationOptions& opts = {});

/// N(g, C) = #(C cap Z^d g) for a region contained in the ball of radius
/// sup_norm.
long long count_in_region(const AffineGroupElementd& g, const std::function<bool(const Eigen::RowVectorXd&)>& inside,
                          double sup_norm);

long long count_in_cone(const AffineGroupElementd& g, const ConeSpec& cone);

/// Counts for several cones from a single enumeration.
std::vector<long long> count_in_cones(const AffineGroupElementd& g, const std::vector<ConeSpec>& cones);

/// Exhaustive scan over m in [-B, B]^d of the points m.g lying in the
/// region. Ground truth for tests; B <= 10.
ShellPoints brute_force_oracle(const AffineGroupElementd& g,
                               const std::function<bool(const Eigen::RowVectorXd&)>& inside, int box_radius);

/// Same scan for (m + xi) M0.
ShellPoints brute_force_oracle(const AffineLattice& L, const std::function<bool(const Eigen::RowVectorXd&)>& inside,
                               int box_radius);

double lemma31_bound(const AffineGroupElementd& g, const ConeSpec& cone, double eta);

/// CSV with columns m1..md, x1..xd, norm.
void write_points_csv(std::ostream& os, const ShellPoints& pts);

}  // namespace afflat

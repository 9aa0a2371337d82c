#pragma once

// Group law on SL(d,R) x| R^d, Iwasawa coordinates, reduction into a Siegel
// set, the horospherical matrices n~(y), Phi_t, the rotation k(v), and the
// escape-of-mass functional built on top of the reduced coordinates.
//
// Conventions: vectors are rows and act on the left, x.g = xM + b.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "afflat/constants.hpp"
#include "afflat/errors.hpp"

namespace afflat {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntRowVector = Eigen::Matrix<long long, 1, Eigen::Dynamic>;

/// Largest admissible 2-norm condition number for matrix work.
inline constexpr double kConditionLimit = 1e12;
/// Tolerance for det(M) = 1 on user-supplied matrices.
inline constexpr double kDetTolerance = 1e-6;
/// Lovasz parameter of the pre-reduction.
inline constexpr double kLllDelta = 0.999;

/// Published slack on the Siegel ratio v_{j+1} <= kappa (2/sqrt 3) v_j.
inline double siegel_slack(int d) { return std::pow(2.0, 0.5 * (d - 1)); }

namespace detail {

template <typename Scalar>
Scalar condition_number(const MatrixX<Scalar>& M) {
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(M);
  const auto& sv = svd.singularValues();
  const Scalar smin = sv(sv.size() - 1);
  if (!(smin > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  return sv(0) / smin;
}

template <typename Scalar>
void require_special_linear(const MatrixX<Scalar>& M, const char* what) {
  using std::abs;
  if (M.rows() != M.cols() || M.rows() < 1) {
    throw UsageError(std::string(what) + ": matrix must be square");
  }
  const Scalar det = M.determinant();
  if (!(abs(det - Scalar(1)) <= Scalar(kDetTolerance))) {
    std::ostringstream os;
    os << what << ": determinant " << static_cast<double>(det) << " is not 1";
    throw NumericError(os.str());
  }
}

inline long long exact_determinant(const IntMatrix& A) {
  // Fraction-free Bareiss elimination.
  const Eigen::Index n = A.rows();
  std::vector<__int128> m(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m[i * n + j] = A(i, j);
  __int128 sign = 1, prev = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (m[k * n + k] == 0) {
      Eigen::Index p = k + 1;
      while (p < n && m[p * n + k] == 0) ++p;
      if (p == n) return 0;
      for (Eigen::Index j = 0; j < n; ++j) std::swap(m[k * n + j], m[p * n + j]);
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      for (Eigen::Index j = k + 1; j < n; ++j) {
        m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
      }
    }
    prev = m[k * n + k];
  }
  return static_cast<long long>(sign * m[(n - 1) * n + (n - 1)]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// G' = SL(d,R) x| R^d

/// Element (M, b) of SL(d,R) x| R^d, with (M,b)(M',b') = (MM', bM' + b').
template <typename Scalar = double>
class AffineGroupElement {
 public:
  using Matrix = MatrixX<Scalar>;
  using RowVector = RowVectorX<Scalar>;

  AffineGroupElement() = default;

  AffineGroupElement(Matrix M, RowVector b) : M_(std::move(M)), b_(std::move(b)) {
    detail::require_special_linear(M_, "AffineGroupElement");
    if (b_.size() != M_.rows()) throw UsageError("AffineGroupElement: shift has wrong dimension");
  }

  static AffineGroupElement identity(int d) {
    return AffineGroupElement(Unchecked{}, Matrix::Identity(d, d), RowVector::Zero(d));
  }
  static AffineGroupElement linear(Matrix M) {
    const auto d = M.rows();
    return AffineGroupElement(std::move(M), RowVector::Zero(d));
  }
  static AffineGroupElement translation(RowVector b) {
    const auto d = b.size();
    return AffineGroupElement(Unchecked{}, Matrix::Identity(d, d), std::move(b));
  }

  int dim() const { return static_cast<int>(M_.rows()); }
  const Matrix& matrix() const { return M_; }
  const RowVector& shift() const { return b_; }

  /// Right action x.g = xM + b.
  template <typename Derived>
  RowVector act(const Eigen::MatrixBase<Derived>& x) const {
    return x * M_ + b_;
  }

  AffineGroupElement inverse() const {
    Matrix Minv = M_.inverse();
    RowVector binv = -b_ * Minv;
    return AffineGroupElement(Unchecked{}, std::move(Minv), std::move(binv));
  }

 private:
  struct Unchecked {};
  AffineGroupElement(Unchecked, Matrix M, RowVector b) : M_(std::move(M)), b_(std::move(b)) {}

  template <typename S>
  friend AffineGroupElement<S> multiply(const AffineGroupElement<S>&, const AffineGroupElement<S>&);

  Matrix M_;
  RowVector b_;
};

template <typename Scalar>
AffineGroupElement<Scalar> multiply(const AffineGroupElement<Scalar>& g, const AffineGroupElement<Scalar>& h) {
  if (g.dim() != h.dim()) throw UsageError("multiply: dimension mismatch");
  return AffineGroupElement<Scalar>(typename AffineGroupElement<Scalar>::Unchecked{}, g.matrix() * h.matrix(),
                                    g.shift() * h.matrix() + h.shift());
}

template <typename Scalar>
AffineGroupElement<Scalar> operator*(const AffineGroupElement<Scalar>& g, const AffineGroupElement<Scalar>& h) {
  return multiply(g, h);
}

using AffineGroupElementd = AffineGroupElement<double>;

// ---------------------------------------------------------------------------
// Iwasawa decomposition M = n(u) a(v) k

template <typename Scalar = double>
struct IwasawaCoordinates {
  VectorX<Scalar> u;  ///< strict upper triangle of n(u), row-major
  VectorX<Scalar> v;  ///< positive diagonal of a(v); product is 1
  MatrixX<Scalar> k;  ///< element of SO(d)

  int dim() const { return static_cast<int>(v.size()); }

  static Eigen::Index u_index(int d, int i, int j) { return i * d - i * (i + 1) / 2 + (j - i - 1); }
  Scalar u_at(int i, int j) const { return u(u_index(dim(), i, j)); }

  MatrixX<Scalar> n() const {
    const int d = dim();
    MatrixX<Scalar> N = MatrixX<Scalar>::Identity(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) N(i, j) = u_at(i, j);
    return N;
  }
  MatrixX<Scalar> a() const { return v.asDiagonal(); }
  /// The upper-triangular factor n(u) a(v).
  MatrixX<Scalar> na() const { return n() * a(); }
  MatrixX<Scalar> reconstruct() const { return na() * k; }
};

/// Iwasawa coordinates of M in SL(d,R), via a triangular-orthogonal (RQ)
/// factorization with positive diagonal.
template <typename Scalar>
IwasawaCoordinates<Scalar> iwasawa(const MatrixX<Scalar>& M) {
  detail::require_special_linear(M, "iwasawa");
  if (detail::condition_number(M) > Scalar(kConditionLimit)) {
    throw NumericError("iwasawa: condition number exceeds 1e12");
  }
  const int d = static_cast<int>(M.rows());
  // M^T J = Q1 R1  =>  M = (J R1^T J)(J Q1^T), J the reversal permutation.
  MatrixX<Scalar> A = M.transpose().rowwise().reverse();
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(A);
  MatrixX<Scalar> Q1 = qr.householderQ();
  MatrixX<Scalar> R1 = qr.matrixQR().template triangularView<Eigen::Upper>();
  MatrixX<Scalar> upper = R1.transpose().colwise().reverse().rowwise().reverse();
  MatrixX<Scalar> k = Q1.transpose().colwise().reverse();
  for (int i = 0; i < d; ++i) {
    if (upper(i, i) < Scalar(0)) {
      upper.col(i) *= Scalar(-1);
      k.row(i) *= Scalar(-1);
    }
  }
  IwasawaCoordinates<Scalar> out;
  out.v = upper.diagonal();
  out.u.resize(d * (d - 1) / 2);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) out.u(IwasawaCoordinates<Scalar>::u_index(d, i, j)) = upper(i, j) / upper(j, j);
  out.k = std::move(k);
  return out;
}

// ---------------------------------------------------------------------------
// Horospherical matrices and the rotation k(v)

/// diag(e^{-(d-1)t/d}, e^{t/d}, ..., e^{t/d}).
template <typename Scalar = double>
MatrixX<Scalar> phi_t(Scalar t, int d) {
  using std::exp;
  if (d < 2) throw UsageError("phi_t: dimension must be >= 2");
  MatrixX<Scalar> P = MatrixX<Scalar>::Zero(d, d);
  P(0, 0) = exp(-Scalar(d - 1) * t / Scalar(d));
  for (int i = 1; i < d; ++i) P(i, i) = exp(t / Scalar(d));
  return P;
}

/// Identity with first row (1, y_2, ..., y_d).
template <typename Scalar>
MatrixX<Scalar> tilde_n(const RowVectorX<Scalar>& y) {
  const auto d = y.size() + 1;
  MatrixX<Scalar> N = MatrixX<Scalar>::Identity(d, d);
  N.block(0, 1, 1, d - 1) = y;
  return N;
}

namespace detail {

template <typename Scalar>
void require_rotatable(const RowVectorX<Scalar>& v) {
  using std::abs;
  if (v.size() < 2) throw UsageError("rotate_to_e1: dimension must be >= 2");
  if (!(abs(v.norm() - Scalar(1)) <= Scalar(1e-9))) throw DomainError("rotate_to_e1: direction is not a unit vector");
  if (!(v(0) > Scalar(-1) + Scalar(1e-12))) throw DomainError("rotate_to_e1: undefined at -e1");
}

}  // namespace detail

/// y(v) = arccos(v_1)/sqrt(1 - v_1^2) (v_2, ..., v_d); y(e1) = 0.
template <typename Scalar>
RowVectorX<Scalar> direction_generator(const RowVectorX<Scalar>& v) {
  using std::atan2;
  detail::require_rotatable(v);
  const auto d = v.size();
  RowVectorX<Scalar> rest = v.tail(d - 1);
  const Scalar s = rest.norm();
  if (s == Scalar(0)) return RowVectorX<Scalar>::Zero(d - 1);
  return (atan2(s, v(0)) / s) * rest;
}

/// k(v) in SO(d) with v k(v) = e1: the exponential of the antisymmetric
/// generator built from y(v), evaluated in closed form as the rotation in
/// the plane spanned by e1 and v.
template <typename Scalar>
MatrixX<Scalar> rotate_to_e1(const RowVectorX<Scalar>& v) {
  using std::atan2;
  using std::cos;
  using std::sin;
  detail::require_rotatable(v);
  const int d = static_cast<int>(v.size());
  MatrixX<Scalar> k = MatrixX<Scalar>::Identity(d, d);
  RowVectorX<Scalar> w = RowVectorX<Scalar>::Zero(d);
  w.tail(d - 1) = v.tail(d - 1);
  const Scalar s = w.norm();
  if (s == Scalar(0)) return k;
  w /= s;
  const Scalar alpha = atan2(s, v(0));
  RowVectorX<Scalar> e1 = RowVectorX<Scalar>::Zero(d);
  e1(0) = Scalar(1);
  // exp(alpha P) = I + sin(alpha) P + (1 - cos(alpha)) P^2,
  // P = w^T e1 - e1^T w, P^2 = -(w^T w + e1^T e1).
  const MatrixX<Scalar> P = w.transpose() * e1 - e1.transpose() * w;
  const MatrixX<Scalar> P2 = -(w.transpose() * w + e1.transpose() * e1);
  k += sin(alpha) * P + (Scalar(1) - cos(alpha)) * P2;
  return k;
}

// ---------------------------------------------------------------------------
// Reduction into the Siegel set

namespace detail {

/// Modified Gram-Schmidt on the rows of C (standard order).
template <typename Scalar>
void gram_schmidt(const MatrixX<Scalar>& C, MatrixX<Scalar>& mu, VectorX<Scalar>& bb) {
  const auto d = C.rows();
  MatrixX<Scalar> star = C;
  mu = MatrixX<Scalar>::Identity(d, d);
  bb.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      mu(i, j) = star.row(i).dot(star.row(j)) / bb(j);
      star.row(i) -= mu(i, j) * star.row(j);
    }
    bb(i) = star.row(i).squaredNorm();
    if (!(bb(i) > Scalar(0))) throw NumericError("reduction: basis is degenerate");
  }
}

template <typename Scalar>
void size_reduce_row(MatrixX<Scalar>& C, IntMatrix& U, MatrixX<Scalar>& mu, Eigen::Index k) {
  using std::nearbyint;
  for (Eigen::Index j = k - 1; j >= 0; --j) {
    const Scalar q = nearbyint(mu(k, j));
    if (q == Scalar(0)) continue;
    C.row(k) -= q * C.row(j);
    U.row(k) -= static_cast<long long>(q) * U.row(j);
    for (Eigen::Index l = 0; l <= j; ++l) mu(k, l) -= q * mu(j, l);
  }
}

/// LLL on rows first..d-1 of C; rows before `first` are kept fixed but are
/// used for size reduction.
template <typename Scalar>
void lll(MatrixX<Scalar>& C, IntMatrix& U, Eigen::Index first, double delta) {
  const auto d = C.rows();
  MatrixX<Scalar> mu;
  VectorX<Scalar> bb;
  Eigen::Index k = first + 1;
  long iterations = 0;
  while (k < d) {
    if (++iterations > 1000000) throw InternalError("reduction: LLL did not terminate");
    gram_schmidt(C, mu, bb);
    size_reduce_row(C, U, mu, k);
    const Scalar m = mu(k, k - 1);
    if (k - 1 >= first && bb(k) < (Scalar(delta) - m * m) * bb(k - 1)) {
      C.row(k).swap(C.row(k - 1));
      U.row(k).swap(U.row(k - 1));
      k = std::max<Eigen::Index>(k - 1, first + 1);
    } else {
      ++k;
    }
  }
}

/// Shortest nonzero vector of the projection of rows i..d-1 orthogonal to
/// rows 0..i-1, if strictly shorter than the current projected row i.
/// Returns its coefficients on rows i..d-1, or an empty vector.
template <typename Scalar>
std::vector<long long> projected_shortest(const MatrixX<Scalar>& mu, const VectorX<Scalar>& bb, Eigen::Index i) {
  using std::ceil;
  using std::floor;
  using std::sqrt;
  const auto d = bb.size();
  const auto n = d - i;
  Scalar best = bb(i) * Scalar(1 - 1e-10);
  std::vector<long long> x(static_cast<std::size_t>(n), 0), best_x;
  std::vector<Scalar> partial(static_cast<std::size_t>(n + 1), Scalar(0));
  // Depth-first over levels j = d-1 down to i (local index t = j - i).
  auto recurse = [&](auto&& self, Eigen::Index j, bool higher_zero) -> void {
    const auto t = j - i;
    Scalar center = 0;
    for (Eigen::Index l = j + 1; l < d; ++l) center -= mu(l, j) * Scalar(x[l - i]);
    const Scalar rem = best - partial[t + 1];
    if (rem <= Scalar(0)) return;
    const Scalar r = sqrt(rem / bb(j));
    long long lo = static_cast<long long>(ceil(center - r));
    const long long hi = static_cast<long long>(floor(center + r));
    if (higher_zero) lo = std::max<long long>(lo, 0);
    for (long long xj = lo; xj <= hi; ++xj) {
      const Scalar c = Scalar(xj) - center;
      const Scalar p = partial[t + 1] + c * c * bb(j);
      if (p >= best) continue;
      x[t] = xj;
      partial[t] = p;
      const bool zero_so_far = higher_zero && xj == 0;
      if (j == i) {
        if (!zero_so_far) {
          best = p;
          best_x = x;
        }
      } else {
        self(self, j - 1, zero_so_far);
      }
    }
    x[t] = 0;
  };
  recurse(recurse, d - 1, true);
  return best_x;
}

inline long long ext_gcd(long long a, long long b, long long& s, long long& t) {
  long long s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (b != 0) {
    const long long q = a / b;
    long long tmp = a - q * b;
    a = b;
    b = tmp;
    tmp = s0 - q * s1;
    s0 = s1;
    s1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  s = s0;
  t = t0;
  return a;
}

/// Unimodular matrix whose first row is the primitive vector x.
inline IntMatrix complete_to_unimodular(const std::vector<long long>& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  IntRowVector cur(n);
  for (Eigen::Index j = 0; j < n; ++j) cur(j) = x[j];
  IntMatrix winv = IntMatrix::Identity(n, n);
  for (Eigen::Index j = 1; j < n; ++j) {
    const long long a = cur(0), b = cur(j);
    if (b == 0) continue;
    long long s = 0, t = 0;
    const long long g = ext_gcd(a, b, s, t);
    const long long ag = a / g, bg = b / g;
    cur(0) = g;
    cur(j) = 0;
    const IntRowVector r0 = winv.row(0), rj = winv.row(j);
    winv.row(0) = ag * r0 + bg * rj;
    winv.row(j) = -t * r0 + s * rj;
  }
  if (cur(0) == -1) {
    winv.row(0) *= -1;
  } else if (cur(0) != 1) {
    throw InternalError("reduction: shortest vector is not primitive");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (winv(0, j) != x[j]) throw InternalError("reduction: unimodular completion failed");
  }
  return winv;
}

/// HKZ-reduces the rows of C (standard order) in place, accumulating the
/// integer transform in U, then size-reduces.
template <typename Scalar>
void hkz_reduce(MatrixX<Scalar>& C, IntMatrix& U) {
  const auto d = C.rows();
  lll(C, U, 0, kLllDelta);
  MatrixX<Scalar> mu;
  VectorX<Scalar> bb;
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    gram_schmidt(C, mu, bb);
    const auto x = projected_shortest(mu, bb, i);
    if (!x.empty()) {
      const IntMatrix V = complete_to_unimodular(x);
      const auto n = d - i;
      C.bottomRows(n) = (V.template cast<Scalar>() * C.bottomRows(n)).eval();
      U.bottomRows(n) = (V * U.bottomRows(n)).eval();
    }
    lll(C, U, i + 1, kLllDelta);
  }
  gram_schmidt(C, mu, bb);
  for (Eigen::Index k = 1; k < d; ++k) size_reduce_row(C, U, mu, k);
}

}  // namespace detail

/// Reduced representative of an affine lattice: (1, b)(gamma M, 0) with
/// gamma in SL(d,Z), gamma M in the Siegel set and b in [-1/2, 1/2)^d.
template <typename Scalar = double>
struct SiegelCoordinates {
  IwasawaCoordinates<Scalar> iwasawa;
  RowVectorX<Scalar> b;
  IntMatrix gamma;
  MatrixX<Scalar> reduced;  ///< gamma * M

  int dim() const { return iwasawa.dim(); }
  const VectorX<Scalar>& v() const { return iwasawa.v; }

  AffineGroupElement<Scalar> representative() const {
    return AffineGroupElement<Scalar>::translation(b) * AffineGroupElement<Scalar>::linear(reduced);
  }
};

/// Representative of x mod 1 in [-1/2, 1/2); x = 1/2 maps to -1/2.
template <typename Scalar>
Scalar half_open_mod_one(Scalar x) {
  using std::floor;
  return x - floor(x + Scalar(0.5));
}

/// Reduces the affine lattice Z^d g. The basis is HKZ- and size-reduced
/// (hence LLL-reduced for any delta < 1), which makes v(g) a function of
/// the lattice only, for inputs without exact length ties.
template <typename Scalar>
SiegelCoordinates<Scalar> siegel_reduce(const AffineGroupElement<Scalar>& g) {
  const MatrixX<Scalar>& M = g.matrix();
  const int d = g.dim();
  if (detail::condition_number(M) > Scalar(kConditionLimit)) {
    throw NumericError("siegel_reduce: condition number exceeds 1e12");
  }
  // Standard LLL order is the reverse of the row order used by n(u)a(v)k.
  MatrixX<Scalar> C = M.colwise().reverse();
  IntMatrix U = IntMatrix::Identity(d, d);
  detail::hkz_reduce(C, U);

  SiegelCoordinates<Scalar> out;
  out.gamma = U.colwise().reverse().rowwise().reverse();
  out.reduced = C.colwise().reverse();
  const long long det = detail::exact_determinant(out.gamma);
  if (det != 1 && det != -1) throw InternalError("siegel_reduce: transform is not unimodular");
  if (det == -1) {
    out.gamma.row(0) *= -1;
    out.reduced.row(0) *= Scalar(-1);
  }
  out.iwasawa = iwasawa(out.reduced);
  RowVectorX<Scalar> beta = out.reduced.transpose().partialPivLu().solve(g.shift().transpose()).transpose();
  out.b = beta.unaryExpr([](Scalar x) { return half_open_mod_one(x); });
  return out;
}

template <typename Scalar>
SiegelCoordinates<Scalar> siegel_reduce(const MatrixX<Scalar>& M) {
  return siegel_reduce(AffineGroupElement<Scalar>::linear(M));
}

// ---------------------------------------------------------------------------
// Escape of mass

/// s_r(g): largest i in 1..d-1 with v_i > 2 cd_siegel r, or 0 if none.
template <typename Scalar>
int siegel_depth(const SiegelCoordinates<Scalar>& sc, double r) {
  const auto k = Constants::for_dimension(sc.dim());
  int s = 0;
  for (int i = 1; i <= sc.dim() - 1; ++i)
    if (sc.v()(i - 1) > Scalar(2.0 * k.cd_siegel * r)) s = i;
  return s;
}

/// F_{R,eta,r} evaluated on reduced coordinates.
template <typename Scalar>
double escape_mass_F(const SiegelCoordinates<Scalar>& sc, double R, double eta, double r) {
  using std::abs;
  const auto k = Constants::for_dimension(sc.dim());
  const int s = siegel_depth(sc, r);
  double prod_v = 1.0, value = 1.0;
  for (int i = 0; i < s; ++i) {
    const double vi = static_cast<double>(sc.v()(i));
    prod_v *= vi;
    value *= std::pow(vi, eta);
    if (!(abs(vi * static_cast<double>(sc.b(i))) <= k.cd_siegel * r)) value = 0.0;
  }
  return prod_v >= R ? value : 0.0;
}

template <typename Scalar>
double escape_mass_F(const AffineGroupElement<Scalar>& g, double R, double eta, double r) {
  if (!(R >= 1.0) || !(eta > 0.0) || !(r > 0.0)) throw UsageError("escape_mass_F: need R >= 1, eta > 0, r > 0");
  return escape_mass_F(siegel_reduce(g), R, eta, r);
}

/// Number of points of Z + b in the closed interval [-h, h].
inline long long shifted_integer_count(double h, double b) {
  if (h < 0) return 0;
  const double lo = std::ceil(-h - b);
  const double hi = std::floor(h - b);
  return hi >= lo ? static_cast<long long>(hi - lo) + 1 : 0;
}

/// r(C) = max{delta_d, sup ||x||} for a region with the given sup-norm.
inline double region_radius(int d, double sup_norm) {
  return std::max(Constants::for_dimension(d).delta_d, sup_norm);
}

/// Right-hand side of the lattice-point bound
/// N(g,C)^eta <= (C_d r^d)^eta prod_{i<=s} v_i^eta #([-c r/v_i, c r/v_i] cap (Z + b_i)).
template <typename Scalar>
double lemma31_bound(const SiegelCoordinates<Scalar>& sc, double region_sup_norm, double eta) {
  const int d = sc.dim();
  const auto k = Constants::for_dimension(d);
  const double r = region_radius(d, region_sup_norm);
  const int s = siegel_depth(sc, r);
  double bound = std::pow(k.C_d * std::pow(r, d), eta);
  for (int i = 0; i < s; ++i) {
    const double vi = static_cast<double>(sc.v()(i));
    const auto cnt = shifted_integer_count(k.cd_siegel * r / vi, static_cast<double>(sc.b(i)));
    bound *= std::pow(vi, eta) * static_cast<double>(cnt);
  }
  return bound;
}

template <typename Scalar>
double lemma31_bound(const AffineGroupElement<Scalar>& g, double region_sup_norm, double eta) {
  if (!(eta > 0.0)) throw UsageError("lemma31_bound: eta must be positive");
  return lemma31_bound(siegel_reduce(g), region_sup_norm, eta);
}

}  // namespace afflat

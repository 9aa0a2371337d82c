#include "afflat/diophantine.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "afflat/csv.hpp"
#include "afflat/errors.hpp"

namespace afflat {

namespace {

using Float50 = boost::multiprecision::cpp_bin_float_50;

Float50 to_float50(const std::map<long long, Rational>& terms) {
  Float50 v = 0;
  for (const auto& [n, q] : terms) {
    const Float50 c = Float50(numerator(q)) / Float50(denominator(q));
    v += n == 1 ? c : c * boost::multiprecision::sqrt(Float50(n));
  }
  return v;
}

std::string format_m(const IntRowVector& m) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < m.size(); ++i) os << (i ? "," : "") << m(i);
  os << ')';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticSurd

QuadraticSurd::QuadraticSurd(const Rational& q) { add_term(1, q); }

void QuadraticSurd::add_term(long long n, const Rational& q) {
  if (q == 0) return;
  auto& slot = terms_[n];
  slot += q;
  if (slot == 0) terms_.erase(n);
}

QuadraticSurd QuadraticSurd::sqrt(long long n) {
  if (n < 0) throw DomainError("sqrt: negative radicand");
  QuadraticSurd out;
  if (n == 0) return out;
  long long f = 1, r = n;
  for (long long p = 2; p * p <= r; ++p)
    while (r % (p * p) == 0) {
      r /= p * p;
      f *= p;
    }
  out.add_term(r, Rational(f));
  return out;
}

bool QuadraticSurd::is_rational() const { return terms_.empty() || (terms_.size() == 1 && terms_.count(1) == 1); }

bool QuadraticSurd::is_integer() const { return is_rational() && denominator(rational_part()) == 1; }

Rational QuadraticSurd::rational_part() const {
  const auto it = terms_.find(1);
  return it == terms_.end() ? Rational(0) : it->second;
}

double QuadraticSurd::to_double() const { return static_cast<double>(to_float50(terms_)); }

double QuadraticSurd::frac_dist() const {
  const Float50 v = to_float50(terms_);
  return static_cast<double>(boost::multiprecision::abs(v - boost::multiprecision::round(v)));
}

QuadraticSurd QuadraticSurd::operator-() const {
  QuadraticSurd out;
  for (const auto& [n, q] : terms_) out.add_term(n, -q);
  return out;
}

QuadraticSurd operator+(const QuadraticSurd& a, const QuadraticSurd& b) {
  QuadraticSurd out = a;
  for (const auto& [n, q] : b.terms_) out.add_term(n, q);
  return out;
}

QuadraticSurd operator-(const QuadraticSurd& a, const QuadraticSurd& b) { return a + (-b); }

QuadraticSurd operator*(const QuadraticSurd& a, const QuadraticSurd& b) {
  QuadraticSurd out;
  for (const auto& [n1, q1] : a.terms_)
    for (const auto& [n2, q2] : b.terms_) {
      // sqrt(n1 n2) = g sqrt(n1/g * n2/g) with the cofactors coprime and squarefree.
      const long long g = std::gcd(n1, n2);
      const long long r1 = n1 / g, r2 = n2 / g;
      if (r2 != 0 && r1 > std::numeric_limits<long long>::max() / r2)
        throw NumericError("quadratic surd: radicand overflow");
      out.add_term(r1 * r2, q1 * q2 * g);
    }
  return out;
}

QuadraticSurd operator/(const QuadraticSurd& a, const QuadraticSurd& b) {
  if (b.terms_.empty()) throw DomainError("quadratic surd: division by zero");
  if (b.is_rational()) return a * QuadraticSurd(Rational(1) / b.rational_part());
  if (b.terms_.size() > 2 || (b.terms_.size() == 2 && b.terms_.count(1) == 0))
    throw UsageError("quadratic surd: divisor must involve a single square root");
  // b = p + q sqrt(r); multiply through by the conjugate.
  const Rational p = b.rational_part();
  long long r = 0;
  Rational q;
  for (const auto& [n, c] : b.terms_)
    if (n != 1) {
      r = n;
      q = c;
    }
  QuadraticSurd conj(p);
  conj.add_term(r, -q);
  const Rational norm = p * p - q * q * r;
  return a * conj * QuadraticSurd(Rational(1) / norm);
}

// ---------------------------------------------------------------------------

ShiftVector::ShiftVector(Eigen::RowVectorXd v) : value(std::move(v)), exact(static_cast<std::size_t>(value.size())) {}

ShiftVector::ShiftVector(const std::vector<QuadraticSurd>& xs) : value(static_cast<Eigen::Index>(xs.size())) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    value(static_cast<Eigen::Index>(i)) = xs[i].to_double();
    exact.emplace_back(xs[i]);
  }
}

bool ShiftVector::fully_exact() const {
  return std::all_of(exact.begin(), exact.end(), [](const auto& e) { return e.has_value(); });
}

namespace {

/// Floating value of |xi . m|_Z and whether an exact form covers every
/// coordinate with m_i != 0.
double float_dot_frac_dist(const Eigen::RowVectorXd& xi, const IntRowVector& m) {
  double sum = 0.0, comp = 0.0;
  auto add = [&](double t) {
    const double y = t - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  };
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (m(i) == 0) continue;
    const double mi = static_cast<double>(m(i));
    const double p = xi(i) * mi;
    const double e = std::fma(xi(i), mi, -p);
    add(p - std::nearbyint(p));
    add(e);
  }
  return frac_dist(sum);
}

bool exact_available(const ShiftVector& xi, const IntRowVector& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (m(i) != 0 && !xi.exact[static_cast<std::size_t>(i)]) return false;
  return true;
}

double exact_dot_frac_dist(const ShiftVector& xi, const IntRowVector& m) {
  QuadraticSurd s;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (m(i) != 0) s = s + QuadraticSurd(m(i)) * *xi.exact[static_cast<std::size_t>(i)];
  return s.is_integer() ? 0.0 : s.frac_dist();
}

}  // namespace

double dot_frac_dist(const ShiftVector& xi, const IntRowVector& m) {
  if (m.size() != xi.dim()) throw UsageError("dot_frac_dist: dimension mismatch");
  const double dist = float_dot_frac_dist(xi.value, m);
  if (dist < kResonanceFlag && exact_available(xi, m)) return exact_dot_frac_dist(xi, m);
  return dist;
}

// ---------------------------------------------------------------------------
// Shell scan

ShellScan::ShellScan(ShiftVector xi, ScanLimits limits)
    : xi_(std::move(xi)), limits_(limits), min_(std::numeric_limits<double>::infinity()) {
  if (xi_.dim() < 1) throw UsageError("shell scan: empty shift vector");
  if (static_cast<int>(xi_.exact.size()) != xi_.dim()) xi_.exact.resize(static_cast<std::size_t>(xi_.dim()));
  argmin_ = IntRowVector::Zero(xi_.dim());
}

bool ShellScan::can_reach(long long B) const {
  if (B > limits_.max_radius) return false;
  return std::pow(2.0 * static_cast<double>(B) + 1.0, xi_.dim()) <= limits_.point_budget;
}

void ShellScan::advance() {
  const long long B = radius_ + 1;
  if (!can_reach(B)) {
    throw ResourceError("shell scan: budget exceeded after radius " + std::to_string(radius_) + " (point budget " +
                        format_double(limits_.point_budget) + ")");
  }
  const int d = xi_.dim();
  IntRowVector m(d), lo(d), hi(d);
  // k is the first coordinate with |m_k| = B; the sign choice m_k = +B or
  // -B covers the shell, and only m with positive first nonzero entry is kept.
  for (int k = 0; k < d; ++k) {
    for (long long sign : {1LL, -1LL}) {
      for (int j = 0; j < d; ++j) {
        if (j < k) {
          lo(j) = -(B - 1);
          hi(j) = B - 1;
        } else if (j == k) {
          lo(j) = hi(j) = sign * B;
        } else {
          lo(j) = -B;
          hi(j) = B;
        }
      }
      m = lo;
      for (;;) {
        int first = 0;
        while (first < d && m(first) == 0) ++first;
        if (first < d && m(first) > 0) {
          const double dist = float_dot_frac_dist(xi_.value, m);
          double value = dist;
          if (dist < kResonanceFlag) {
            if (exact_available(xi_, m))
              value = exact_dot_frac_dist(xi_, m);
            else if (dist > 0.0)
              ++unconfirmed_;
          }
          if (value < min_) {
            min_ = value;
            argmin_ = m;
          }
        }
        int j = d - 1;
        while (j >= 0 && m(j) == hi(j)) {
          m(j) = lo(j);
          --j;
        }
        if (j < 0) break;
        ++m(j);
      }
    }
  }
  radius_ = B;
}

void ShellScan::advance_to(long long B) {
  while (radius_ < B) advance();
}

long long dirichlet_bound(double T, int d) {
  if (!(T > 0.0)) throw UsageError("dirichlet bound: T must be positive");
  auto pow_ge = [&](long long N) {
    long double p = 1;
    for (int i = 0; i < d; ++i) p *= static_cast<long double>(N);
    return p >= static_cast<long double>(T);
  };
  auto N = std::max<long long>(1, static_cast<long long>(std::floor(std::pow(T, 1.0 / d))));
  while (!pow_ge(N)) ++N;
  while (N > 1 && pow_ge(N - 1)) --N;
  return N;
}

namespace {

long long zeta_on(ShellScan& scan, double T, int d) {
  const long long bound = dirichlet_bound(T, d);
  while (!(scan.min_dist() <= 1.0 / T)) {
    if (scan.radius() > bound) throw NumericError("zeta: Dirichlet bound exceeded; floating error too large");
    scan.advance();
  }
  return std::max<long long>(scan.radius(), 1);
}

}  // namespace

long long zeta(const ShiftVector& xi, double T, ScanLimits limits) {
  if (!(T > 0.0)) throw UsageError("zeta: T must be positive");
  ShellScan scan(xi, limits);
  return zeta_on(scan, T, xi.dim());
}

long long zeta_box_oracle(const ShiftVector& xi, double T) {
  const int d = xi.dim();
  for (long long N = 1;; ++N) {
    if (std::pow(2.0 * N + 1.0, d) > 1e8) throw ResourceError("zeta oracle: box too large");
    double best = std::numeric_limits<double>::infinity();
    IntRowVector m = IntRowVector::Constant(d, -N);
    for (;;) {
      if (!m.isZero()) best = std::min(best, dot_frac_dist(xi, m));
      int j = d - 1;
      while (j >= 0 && m(j) == N) {
        m(j) = -N;
        --j;
      }
      if (j < 0) break;
      ++m(j);
    }
    if (best <= 1.0 / T) return N;
  }
}

// ---------------------------------------------------------------------------

VaguelyResult vaguely_diophantine_partial(const ShiftVector& xi, double rho, double mu, double nu, int L_max,
                                          ScanLimits limits) {
  if (L_max < 1 || L_max > 60) throw UsageError("vaguely Diophantine: L_max must lie in [1, 60]");
  VaguelyResult out;
  ShellScan scan(xi, limits);
  for (int l = 1; l <= L_max; ++l) {
    const double T = std::ldexp(1.0, l - 1);
    long long z = 0;
    try {
      z = zeta_on(scan, T, xi.dim());
    } catch (const ResourceError&) {
      out.budget_exhausted = true;
      break;
    }
    const double term = std::pow(static_cast<double>(l), rho) * std::exp2(mu * l) * std::pow(static_cast<double>(z), -nu);
    out.partial_sum += term;
    out.terms.push_back({l, T, z, term, out.partial_sum});
  }
  const auto n = out.terms.size();
  if (n < 4) {
    out.diagnostic = "diagnostic: too few terms for a trend";
  } else {
    bool growing = true;
    for (std::size_t i = n - 3; i < n; ++i) growing = growing && out.terms[i].term >= out.terms[i - 1].term;
    if (growing)
      out.diagnostic = "diagnostic: terms nondecreasing over the last 4 values (suggests divergence)";
    else if (out.terms.back().term <= 1e-6 * out.partial_sum)
      out.diagnostic = "diagnostic: last term below 1e-6 of the partial sum (consistent with convergence)";
    else
      out.diagnostic = "diagnostic: no clear trend";
  }
  if (out.budget_exhausted) out.diagnostic += "; scan budget exhausted";
  return out;
}

BrjunoResult brjuno_partial(const ShiftVector& xi, double s, int n_max, ScanLimits limits) {
  if (!(s > 0.0)) throw UsageError("brjuno: s must be positive");
  if (n_max < 0 || n_max > 62) throw UsageError("brjuno: n_max must lie in [0, 62]");
  BrjunoResult out;
  ShellScan scan(xi, limits);
  for (int n = 0; n <= n_max; ++n) {
    const long long N = 1LL << n;
    if (!scan.can_reach(N)) {
      out.budget_exhausted = true;
      break;
    }
    scan.advance_to(N);
    if (scan.min_dist() == 0.0) {
      out.resonance = true;
      out.resonance_m = scan.argmin();
      const double inf = std::numeric_limits<double>::infinity();
      out.partial_sum = inf;
      out.terms.push_back({n, N, inf, inf, inf});
      break;
    }
    const double phi = -std::log(scan.min_dist());
    const double term = std::exp2(-n / s) * phi;
    out.partial_sum += term;
    out.terms.push_back({n, N, phi, term, out.partial_sum});
  }
  if (out.resonance) {
    out.verdict = "not Brjuno (exact resonance at m = " + format_m(out.resonance_m) + ")";
  } else {
    out.verdict = "diagnostic: partial sum " + format_double(out.partial_sum) + " after " +
                  std::to_string(out.terms.size()) + " terms; convergence is not decided numerically";
    if (scan.unconfirmed_flags() > 0) out.verdict += "; possible resonance below 1e-12 not confirmed exactly";
    if (out.budget_exhausted) out.verdict += "; scan budget exhausted";
  }
  return out;
}

DiophantineProfile diophantine_profile(const ShiftVector& xi, const std::vector<double>& Ts, int n_max,
                                       ScanLimits limits) {
  DiophantineProfile p;
  p.xi = xi.value;
  for (double T : Ts) p.zeta_table.emplace_back(T, zeta(xi, T, limits));
  const auto b = brjuno_partial(xi, 1.0, n_max, limits);
  for (const auto& t : b.terms) p.phi_table.emplace_back(t.N, t.phi);
  return p;
}

void write_zeta_csv(std::ostream& os, const std::vector<std::pair<double, long long>>& table) {
  CsvWriter w(os);
  w.header({"T", "zeta"});
  for (const auto& [T, z] : table) {
    w.field(T).field(z);
    w.end_row();
  }
}

void write_brjuno_csv(std::ostream& os, const BrjunoResult& r) {
  CsvWriter w(os);
  w.header({"n", "N", "phi", "term", "partial"});
  for (const auto& t : r.terms) {
    w.field(t.n).field(t.N).field(t.phi).field(t.term).field(t.partial);
    w.end_row();
  }
}

void write_vaguely_csv(std::ostream& os, const VaguelyResult& r) {
  CsvWriter w(os);
  w.header({"l", "T", "zeta", "term", "partial"});
  for (const auto& t : r.terms) {
    w.field(t.l).field(t.T).field(t.zeta).field(t.term).field(t.partial);
    w.end_row();
  }
}

}  // namespace afflat

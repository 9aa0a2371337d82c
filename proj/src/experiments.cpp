#include "afflat/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afflat/constants.hpp"
#include "afflat/csv.hpp"
#include "afflat/errors.hpp"
#include "afflat/rng.hpp"

namespace afflat {

Estimate estimate_of(const std::vector<double>& xs) {
  Estimate e;
  e.n = static_cast<long long>(xs.size());
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n < 2) return e;
  double ss = 0.0;
  for (double x : xs) ss += (x - e.mean) * (x - e.mean);
  e.se = std::sqrt(ss / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
  return e;
}

DirectionSet shell_directions(const AffineLattice& L, const ShellSpec& shell, const EnumerationOptions& opts) {
  return directions_of(enumerate_shell(L, shell, opts));
}

CapCounts sample_cap_counts(const DirectionSet& D, const CapCountSpec& spec, const DirectionSampler& lambda) {
  const int d = D.dim();
  if (spec.sigmas.empty()) throw UsageError("cap counts: no sigma given");
  if (spec.samples < 1) throw UsageError("cap counts: samples must be positive");
  if (lambda.dim() != d) throw UsageError("cap counts: sampler dimension mismatch");
  CapCounts out;
  out.points = D.size();
  for (double s : spec.sigmas) out.radii.push_back(cap_radius_for_sigma(s, spec.shell.c, spec.shell.T, d));
  const DirectionIndex index(D, *std::max_element(out.radii.begin(), out.radii.end()));
  const auto n = static_cast<std::size_t>(spec.samples);
  const auto m = static_cast<Eigen::Index>(spec.sigmas.size());
  out.centers.resize(static_cast<Eigen::Index>(n), d);
  out.counts.resize(static_cast<Eigen::Index>(n), m);
  parallel_for(n, spec.threads, [&](std::size_t i) {
    auto rng = sample_engine(spec.seed, i);
    const Eigen::RowVectorXd v = lambda.sample(rng);
    const auto row = static_cast<Eigen::Index>(i);
    out.centers.row(row) = v;
    for (Eigen::Index j = 0; j < m; ++j)
      out.counts(row, j) = index.count_in_cap(CapSpec(v, out.radii[static_cast<std::size_t>(j)]));
  });
  return out;
}

Estimate mean_count(const CapCounts& cc, int j) {
  std::vector<double> xs(static_cast<std::size_t>(cc.counts.rows()));
  for (Eigen::Index i = 0; i < cc.counts.rows(); ++i) xs[i] = static_cast<double>(cc.counts(i, j));
  return estimate_of(xs);
}

Estimate product_moment(const CapCounts& cc, int i, int j) {
  std::vector<double> xs(static_cast<std::size_t>(cc.counts.rows()));
  for (Eigen::Index r = 0; r < cc.counts.rows(); ++r)
    xs[r] = static_cast<double>(cc.counts(r, i)) * static_cast<double>(cc.counts(r, j));
  return estimate_of(xs);
}

HypothesisCheck check_moment_hypothesis(const std::vector<std::complex<double>>& z, int d, const ShiftVector& xi) {
  HypothesisCheck h;
  for (const auto& zj : z) h.eta += std::max(0.0, zj.real());
  if (h.eta < d) {
    h.kind = Hypothesis::A1;
    h.diagnostic = "A1 holds";
    return h;
  }
  if (h.eta >= d + 1) {
    h.kind = Hypothesis::Unsupported;
    h.diagnostic = "sum of positive real parts " + format_double(h.eta) + " is not below d + 1";
    return h;
  }
  h.kind = Hypothesis::A2;
  const double rho = d == 2 ? 0.0 : d - 1.0;
  const double mu = d == 2 ? h.eta - 2.0 : h.eta - d;
  const double nu = d == 2 ? 2.0 : 1.0;
  const auto v = vaguely_diophantine_partial(xi, rho, mu, nu, 20, ScanLimits{1e7, 10000000});
  h.diagnostic = "A2 requires xi (" + format_double(rho) + "," + format_double(mu) + "," + format_double(nu) +
                 ")-vaguely Diophantine; partial sum " + format_double(v.partial_sum) + " over " +
                 std::to_string(v.terms.size()) + " terms, " + v.diagnostic;
  return h;
}

MomentResult moment_from_counts(CapCounts counts, const MomentSpec& spec, HypothesisCheck guard) {
  const auto m = counts.counts.cols();
  if (static_cast<Eigen::Index>(spec.z.size()) != m) throw UsageError("moments: need one exponent per sigma");
  const auto n = static_cast<std::size_t>(counts.counts.rows());
  std::vector<double> re(n), im(n), rre, rim;
  if (spec.K) {
    rre.resize(n);
    rim.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> prod = 1.0;
    long long mx = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const long long N = counts.counts(static_cast<Eigen::Index>(i), j);
      mx = std::max(mx, N);
      prod *= std::exp(spec.z[static_cast<std::size_t>(j)] * std::log(static_cast<double>(N) + 1.0));
    }
    re[i] = prod.real();
    im[i] = prod.imag();
    if (spec.K) {
      const bool keep = mx <= *spec.K;
      rre[i] = keep ? prod.real() : 0.0;
      rim[i] = keep ? prod.imag() : 0.0;
    }
  }
  MomentResult r;
  const auto er = estimate_of(re), ei = estimate_of(im);
  r.estimate = {er.mean, ei.mean};
  r.se_re = er.se;
  r.se_im = ei.se;
  if (spec.K) {
    const auto a = estimate_of(rre), b = estimate_of(rim);
    r.restricted = std::complex<double>(a.mean, b.mean);
    r.restricted_se_re = a.se;
    r.restricted_se_im = b.se;
  }
  r.guard = std::move(guard);
  r.counts = std::move(counts);
  return r;
}

MomentResult empirical_moment(const AffineLattice& L, const ShellSpec& shell, const MomentSpec& spec,
                              const DirectionSampler& lambda, const ShiftVector& xi_for_guard) {
  if (spec.z.size() != spec.sigmas.size()) throw UsageError("moments: need one exponent per sigma");
  auto guard = check_moment_hypothesis(spec.z, L.dim(), xi_for_guard);
  std::vector<std::string> warnings;
  if (guard.kind == Hypothesis::Unsupported) {
    if (!spec.override_guard)
      throw UsageError("moments: " + guard.diagnostic + "; the limit theorem does not apply (override to proceed)");
    warnings.push_back("hypothesis guard overridden: " + guard.diagnostic);
  }
  const DirectionSet D = shell_directions(L, shell);
  CapCountSpec cs{shell, spec.sigmas, spec.samples, spec.seed, spec.threads};
  auto r = moment_from_counts(sample_cap_counts(D, cs, lambda), spec, std::move(guard));
  r.warnings = std::move(warnings);
  return r;
}

LimitDistribution empirical_limit_distribution(const CapCounts& cc, double r0) {
  LimitDistribution out;
  out.samples = cc.counts.rows();
  out.r0 = r0;
  const auto m = cc.counts.cols();
  std::vector<double> tail(static_cast<std::size_t>(out.samples));
  std::vector<long long> key(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < cc.counts.rows(); ++i) {
    long long mx = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      key[j] = cc.counts(i, j);
      mx = std::max(mx, key[j]);
    }
    ++out.histogram[key];
    tail[i] = static_cast<double>(mx) > r0 ? 1.0 : 0.0;
  }
  for (Eigen::Index j = 0; j < m; ++j) out.marginal_means.push_back(mean_count(cc, static_cast<int>(j)));
  out.tail_mass = estimate_of(tail);
  return out;
}

// ---------------------------------------------------------------------------

AffineGroupElementd sample_haar_d2(std::mt19937_64& rng, HaarSamplerStats* stats) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double x = 0.0, y = 0.0;
  for (;;) {
    if (stats) ++stats->proposed;
    x = unif(rng) - 0.5;
    const double u = unif(rng);
    if (u == 0.0) continue;
    y = 0.5 * std::numbers::sqrt3 / u;  // density proportional to y^{-2} on [sqrt3/2, inf)
    if (x * x + y * y >= 1.0) break;
  }
  if (stats) ++stats->accepted;
  const double theta = 2.0 * std::numbers::pi * unif(rng);
  Eigen::RowVectorXd b(2);
  b << unif(rng) - 0.5, unif(rng) - 0.5;
  const double v1 = std::sqrt(y);
  Eigen::MatrixXd na(2, 2), k(2, 2);
  na << v1, x / v1, 0.0, 1.0 / v1;
  k << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Eigen::MatrixXd M = na * k;
  return AffineGroupElementd(M, b * M);
}

namespace {

template <typename Fn>
std::vector<HaarSamplerStats> haar_loop(long long samples, std::uint64_t seed, unsigned threads, Fn&& fn) {
  if (samples < 1) throw UsageError("Haar sampling: samples must be positive");
  std::vector<HaarSamplerStats> stats(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
    auto rng = sample_engine(seed, i);
    fn(i, sample_haar_d2(rng, &stats[i]));
  });
  return stats;
}

HaarSamplerStats total(const std::vector<HaarSamplerStats>& s) {
  HaarSamplerStats t;
  for (const auto& x : s) {
    t.accepted += x.accepted;
    t.proposed += x.proposed;
  }
  if (t.proposed > 0 && static_cast<double>(t.accepted) < 0.01 * static_cast<double>(t.proposed))
    throw UsageError("Haar sampling: rejection efficiency below 1%");
  return t;
}

}  // namespace

Estimate haar_average_d2(long long samples, std::uint64_t seed, unsigned threads,
                         const std::function<double(const AffineGroupElementd&)>& fn, HaarSamplerStats* stats) {
  std::vector<double> values(static_cast<std::size_t>(std::max(samples, 0LL)));
  const auto s = total(haar_loop(samples, seed, threads, [&](std::size_t i, const AffineGroupElementd& g) {
    values[i] = fn(g);
  }));
  if (stats) *stats = s;
  return estimate_of(values);
}

SiegelCheckResult siegel_mc_check_d2(double sigma1, double sigma2, long long samples, std::uint64_t seed,
                                     unsigned threads) {
  const std::vector<ConeSpec> cones{ConeSpec(0.0, sigma1, 2), ConeSpec(0.0, sigma2, 2)};
  std::vector<double> off(static_cast<std::size_t>(std::max(samples, 0LL))), diag(off.size());
  const auto s = total(haar_loop(samples, seed, threads, [&](std::size_t i, const AffineGroupElementd& g) {
    const auto n = count_in_cones(g, cones);
    // The cones are nested, so C_0(sigma1) cap C_0(sigma2) is the smaller one.
    const long long both = std::min(n[0], n[1]);
    off[i] = static_cast<double>(n[0]) * static_cast<double>(n[1]) - static_cast<double>(both);
    diag[i] = static_cast<double>(both);
  }));
  SiegelCheckResult r;
  r.sigma1 = sigma1;
  r.sigma2 = sigma2;
  r.off_diagonal = estimate_of(off);
  r.diagonal = estimate_of(diag);
  r.off_reference = sigma1 * sigma2;
  r.diag_reference = std::min(sigma1, sigma2);
  r.z_off = (r.off_diagonal.mean - r.off_reference) / r.off_diagonal.se;
  r.z_diag = (r.diagonal.mean - r.diag_reference) / r.diagonal.se;
  r.acceptance_rate = static_cast<double>(s.accepted) / static_cast<double>(s.proposed);
  return r;
}

// ---------------------------------------------------------------------------

Eigen::RowVectorXd sample_psi(PsiKind psi, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0), u01(0.0, 1.0);
  Eigen::RowVectorXd y(dim);
  for (int i = 0; i < dim; ++i) {
    if (psi == PsiKind::Constant) {
      y(i) = unif(rng);
      continue;
    }
    // exp(-1/(1-x^2)) <= e^{-1}; rejection against uniform.
    for (;;) {
      const double x = unif(rng);
      if (std::abs(x) >= 1.0) continue;
      if (u01(rng) * std::exp(-1.0) <= std::exp(-1.0 / (1.0 - x * x))) {
        y(i) = x;
        break;
      }
    }
  }
  return y;
}

EscapeScanResult escape_scan(const EscapeScanSpec& spec) {
  const int d = static_cast<int>(spec.M0.rows());
  if (d < 2) throw UsageError("escape scan: dimension must be >= 2");
  detail::require_special_linear(spec.M0, "escape scan");
  if (spec.xi.size() != d) throw UsageError("escape scan: xi has wrong dimension");
  if (!(spec.eta > 0.0)) throw UsageError("escape scan: eta must be positive");
  const double delta = Constants::for_dimension(d).delta_d;
  const double r = spec.r == 0.0 ? delta : spec.r;
  if (!(r >= delta)) throw UsageError("escape scan: r must be at least d 4^d = " + format_double(delta));
  if (spec.t_list.empty() || spec.R_list.empty()) throw UsageError("escape scan: empty t or R list");
  for (double t : spec.t_list)
    if (!(t >= 0.0)) throw UsageError("escape scan: t must be non-negative");
  for (double R : spec.R_list)
    if (!(R >= 1.0)) throw UsageError("escape scan: R must be at least 1");
  if (spec.samples < 1) throw UsageError("escape scan: samples must be positive");

  const std::size_t nt = spec.t_list.size(), nR = spec.R_list.size();
  const auto n = static_cast<std::size_t>(spec.samples);
  std::vector<Eigen::MatrixXd> phis;
  for (double t : spec.t_list) phis.push_back(phi_t(t, d));

  // Sums are reduced in sample order chunk by chunk, so results do not
  // depend on the thread count.
  constexpr std::size_t kChunk = 1 << 15;
  std::vector<double> sum(nt * nR, 0.0), sumsq(nt * nR, 0.0);
  std::vector<long long> drops(nt, 0);
  std::vector<double> vals;
  std::vector<char> dropped;
  for (std::size_t base = 0; base < n; base += kChunk) {
    const std::size_t len = std::min(kChunk, n - base);
    vals.assign(len * nt * nR, 0.0);
    dropped.assign(len * nt, 0);
    parallel_for(len, spec.threads, [&](std::size_t k) {
      auto rng = sample_engine(spec.seed, base + k);
      const Eigen::RowVectorXd y = sample_psi(spec.psi, d - 1, rng);
      const Eigen::MatrixXd Mn = spec.M0 * tilde_n(y);
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const Eigen::MatrixXd M = Mn * phis[ti];
        try {
          const auto sc = siegel_reduce(AffineGroupElementd(M, spec.xi * M));
          for (std::size_t Ri = 0; Ri < nR; ++Ri)
            vals[(k * nt + ti) * nR + Ri] = escape_mass_F(sc, spec.R_list[Ri], spec.eta, r);
        } catch (const NumericError&) {
          dropped[k * nt + ti] = 1;
        }
      }
    });
    for (std::size_t k = 0; k < len; ++k)
      for (std::size_t ti = 0; ti < nt; ++ti) {
        if (dropped[k * nt + ti]) {
          ++drops[ti];
          continue;
        }
        for (std::size_t Ri = 0; Ri < nR; ++Ri) {
          const double v = vals[(k * nt + ti) * nR + Ri];
          sum[ti * nR + Ri] += v;
          sumsq[ti * nR + Ri] += v * v;
        }
      }
  }

  EscapeScanResult out;
  out.r = r;
  out.drops = drops;
  out.max_over_t.assign(nR, 0.0);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    const long long kept = spec.samples - drops[ti];
    if (static_cast<double>(drops[ti]) > 0.01 * static_cast<double>(spec.samples)) out.valid = false;
    for (std::size_t Ri = 0; Ri < nR; ++Ri) {
      Estimate e;
      e.n = kept;
      if (kept > 0) {
        e.mean = sum[ti * nR + Ri] / static_cast<double>(kept);
        if (kept > 1) {
          const double var = std::max(0.0, (sumsq[ti * nR + Ri] - kept * e.mean * e.mean) / (kept - 1));
          e.se = std::sqrt(var / static_cast<double>(kept));
        }
      }
      out.cells.push_back({spec.t_list[ti], spec.R_list[Ri], e});
      out.max_over_t[Ri] = std::max(out.max_over_t[Ri], e.mean);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double bridge_time(double T, int d) {
  if (!(T > 1.0)) throw UsageError("bridge: T must exceed 1");
  return d / (d - 1.0) * std::log(T);
}

BridgeResult counting_bridge_check(const AffineLattice& L, const BridgeSpec& spec) {
  const int d = L.dim();
  if (!(spec.sigma > 0.0)) throw UsageError("bridge: sigma must be positive");
  if (!(spec.epsilon >= 0.0)) throw UsageError("bridge: epsilon must be non-negative");
  if (spec.samples < 1) throw UsageError("bridge: samples must be positive");
  spec.shell.validate();
  BridgeResult out;
  out.t = bridge_time(spec.shell.T, d);
  out.samples = spec.samples;
  const DirectionSet D = shell_directions(L, spec.shell);
  const double theta = cap_radius_for_sigma(spec.sigma, spec.shell.c, spec.shell.T, d);
  const DirectionIndex index(D, theta);
  const ConeSpec cone(0.0, spec.sigma + spec.epsilon, d);
  Eigen::RowVectorXd e1 = Eigen::RowVectorXd::Zero(d);
  e1(0) = 1.0;
  const auto lambda = DirectionSampler::hemisphere(e1);
  const Eigen::MatrixXd Phi = phi_t(out.t, d);

  const auto n = static_cast<std::size_t>(spec.samples);
  out.lhs.assign(n, 0);
  out.rhs.assign(n, 0);
  out.centers.resize(static_cast<Eigen::Index>(n), d);
  parallel_for(n, spec.threads, [&](std::size_t i) {
    auto rng = sample_engine(spec.seed, i);
    const Eigen::RowVectorXd v = lambda.sample(rng);
    out.centers.row(static_cast<Eigen::Index>(i)) = v;
    out.lhs[i] = index.count_in_cap(CapSpec(v, theta));
    const Eigen::MatrixXd M = L.basis() * rotate_to_e1(v) * Phi;
    out.rhs[i] = count_in_cone(AffineGroupElementd(M, L.shift() * M), cone);
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (out.lhs[i] > out.rhs[i]) ++out.violations;
    out.max_lhs = std::max(out.max_lhs, out.lhs[i]);
    out.max_rhs = std::max(out.max_rhs, out.rhs[i]);
  }
  return out;
}

}  // namespace afflat

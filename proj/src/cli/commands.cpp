#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "afflat/cli.hpp"
#include "afflat/constants.hpp"
#include "afflat/csv.hpp"
#include "afflat/errors.hpp"
#include "afflat/experiments.hpp"
#include "afflat/rng.hpp"
#include "config.hpp"

namespace afflat::cli {

namespace {

using nlohmann::json;

struct Output {
  std::ostringstream csv;
  json summary = json::object();
  /// Printed instead of the CSV when no --out is given, if set.
  std::optional<std::string> plain;
};

using Handler = void (*)(const Resolved&, unsigned threads, Output&);

struct Command {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  Handler handler;
};

// ---------------------------------------------------------------------------
// shared parameter groups and parsing

ParamSpec p_d{"d", std::nullopt, "dimension"};
ParamSpec p_xi{"xi", std::nullopt, "shift, e.g. \"sqrt2-1,sqrt3-1\" or \"1/3,1/2\""};
ParamSpec p_M0{"M0", "I", "base matrix: I or d*d row-major entries"};
ParamSpec p_c{"c", "0", "inner shell radius ratio in [0,1)"};
ParamSpec p_seed{"seed", "1", "64-bit seed"};
ParamSpec p_budget{"budget", "1e8", "bound on the expected number of enumerated points"};
ParamSpec p_lambda{"lambda", "uniform", "sampling measure for disc centres: uniform | hemisphere"};

int dimension(const Resolved& r, int min_d = 2) {
  const long long d = r.integer("d");
  if (d < min_d || d > 12) throw UsageError("--d must lie in [" + std::to_string(min_d) + ", 12]");
  return static_cast<int>(d);
}

Eigen::MatrixXd base_matrix(const Resolved& r, int d) {
  if (r.is("M0", "I")) return Eigen::MatrixXd::Identity(d, d);
  const auto parts = split_top_level(r.raw("M0"), ',');
  if (static_cast<int>(parts.size()) != d * d)
    throw UsageError("--M0: expected I or " + std::to_string(d * d) + " entries");
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = parse_scalar(parts[static_cast<std::size_t>(i * d + j)]).value;
  const double det = M.determinant();
  if (!(std::abs(det - 1.0) <= kDetTolerance)) throw DomainError("--M0: determinant is " + format_double(det) + ", not 1");
  return M;
}

AffineLattice lattice(const Resolved& r, int d, ShiftVector* xi_out = nullptr) {
  const auto xi = parse_xi(r.raw("xi"), d);
  if (xi_out) *xi_out = xi;
  return AffineLattice(base_matrix(r, d), xi.value);
}

ShellSpec shell(const Resolved& r) {
  ShellSpec s{r.real("c"), r.real("T")};
  s.validate();
  return s;
}

EnumerationOptions enum_options(const Resolved& r) {
  EnumerationOptions o;
  o.budget = r.real("budget");
  if (!(o.budget > 0.0)) throw UsageError("--budget must be positive");
  return o;
}

long long positive(const Resolved& r, const std::string& key) {
  const long long v = r.integer(key);
  if (v < 1) throw UsageError("--" + key + " must be positive");
  return v;
}

std::vector<double> positive_list(const Resolved& r, const std::string& key) {
  auto v = r.reals(key);
  for (double x : v)
    if (!(x > 0.0)) throw UsageError("--" + key + ": entries must be positive");
  return v;
}

DirectionSampler sampler(const Resolved& r, int d) {
  if (r.is("lambda", "uniform")) return DirectionSampler::uniform(d);
  if (r.is("lambda", "hemisphere")) {
    Eigen::RowVectorXd e1 = Eigen::RowVectorXd::Zero(d);
    e1(0) = 1.0;
    return DirectionSampler::hemisphere(e1);
  }
  throw UsageError("--lambda: expected uniform or hemisphere");
}

json estimate_json(const Estimate& e) { return {{"estimate", e.mean}, {"se", e.se}, {"n", e.n}}; }

/// Check |estimate - reference| <= 3 se.
json three_se_check(const Estimate& e, double reference) {
  const double z = e.se > 0 ? (e.mean - reference) / e.se : (e.mean == reference ? 0.0 : INFINITY);
  return {{"estimate", e.mean}, {"se", e.se}, {"reference", reference}, {"z", z}, {"pass", std::abs(z) <= 3.0}};
}

void finish_checks(Output& o) {
  auto& checks = o.summary["checks"];
  if (checks.is_null() || checks.empty()) {
    o.summary["pass"] = nullptr;
    return;
  }
  bool pass = true;
  for (const auto& [k, v] : checks.items()) pass = pass && v.at("pass").get<bool>();
  o.summary["pass"] = pass;
}

std::vector<std::string> count_columns(int d, std::size_t m) {
  std::vector<std::string> cols;
  for (int k = 0; k < d; ++k) cols.push_back("v" + std::to_string(k + 1));
  for (std::size_t j = 0; j < m; ++j) cols.push_back("N" + std::to_string(j + 1));
  return cols;
}

void write_counts(CsvWriter& w, const CapCounts& cc) {
  for (Eigen::Index i = 0; i < cc.counts.rows(); ++i) {
    for (Eigen::Index k = 0; k < cc.centers.cols(); ++k) w.field(cc.centers(i, k));
    for (Eigen::Index j = 0; j < cc.counts.cols(); ++j) w.field(cc.counts(i, j));
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// subcommands

void cmd_enumerate(const Resolved& r, unsigned, Output& o) {
  const int d = dimension(r);
  const auto L = lattice(r, d);
  const auto sh = shell(r);
  const auto pts = enumerate_shell(L, sh, enum_options(r));
  write_points_csv(o.csv, pts);
  o.summary["estimates"] = {{"count", pts.size()}, {"volume", sh.volume(d)},
                            {"count_over_volume", static_cast<double>(pts.size()) / sh.volume(d)}};
}

SphereRegion parse_region(const std::string& text, int d, std::string& canonical) {
  canonical = text;
  if (text == "all") return SphereRegion::whole(d);
  auto vec = [&](const std::string& s) {
    const auto parts = split_top_level(s, ',');
    if (static_cast<int>(parts.size()) != d) throw UsageError("region '" + text + "': axis needs d entries");
    Eigen::RowVectorXd v(d);
    for (int k = 0; k < d; ++k) v(k) = parse_scalar(parts[static_cast<std::size_t>(k)]).value;
    if (!(v.norm() > 0.0)) throw UsageError("region '" + text + "': zero axis");
    return Eigen::RowVectorXd(v.normalized());
  };
  if (text.rfind("hemi:", 0) == 0) return SphereRegion::hemisphere(vec(text.substr(5)));
  if (text.rfind("cap:", 0) == 0) {
    const auto rest = text.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw UsageError("region '" + text + "': expected cap:THETA:AXIS");
    return SphereRegion::cap(CapSpec(vec(rest.substr(colon + 1)), parse_scalar(rest.substr(0, colon)).value));
  }
  throw UsageError("region '" + text + "': expected all, hemi:AXIS or cap:THETA:AXIS");
}

std::vector<double> s_grid(const Resolved& r) {
  const double smax = r.real("smax");
  const long long bins = positive(r, "bins");
  double smin = r.is("smin", "auto") ? smax / static_cast<double>(bins) : r.real("smin");
  if (!(smax > 0.0) || !(smin > 0.0) || smin > smax) throw UsageError("need 0 < smin <= smax");
  std::vector<double> g;
  if (bins == 1) return {smax};
  for (long long k = 0; k < bins; ++k) g.push_back(smin + (smax - smin) * static_cast<double>(k) / (bins - 1));
  return g;
}

void cmd_paircorr(const Resolved& r, unsigned threads, Output& o) {
  const int d = dimension(r);
  const auto L = lattice(r, d);
  const auto grid = s_grid(r);
  std::string c1, c2;
  const auto R1 = parse_region(r.raw("region1"), d, c1);
  const auto R2 = parse_region(r.raw("region2"), d, c2);
  const bool restricted = !(c1 == "all" && c2 == "all");
  double fraction = 1.0;
  if (r.is("expect_fraction", "auto")) {
    if (c1 == c2)
      fraction = R1.area_fraction;
    else if (c1 == "all")
      fraction = R2.area_fraction;
    else if (c2 == "all")
      fraction = R1.area_fraction;
    else
      throw UsageError("--expect_fraction must be given for two different regions");
  } else {
    fraction = r.real("expect_fraction");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw UsageError("--expect_fraction must lie in [0, 1]");
  }

  const DirectionSet D = shell_directions(L, shell(r), enum_options(r));
  PairCorrelationResult pc;
  if (restricted) {
    if (D.size() < 2) throw DomainError("pair correlation: need at least two directions");
    pc.s_grid = grid;
    pc.N = D.size();
    pc.d = d;
    for (double s : grid) {
      pc.values.push_back(pair_correlation_restricted(D, R1, R2, s));
      pc.poisson_reference.push_back(poisson_pair_reference(s, d));
    }
  } else {
    pc = pair_correlation(D, grid, threads);
  }
  CsvWriter w(o.csv);
  w.header({"s", "R2", "poisson_ref"});
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    w.field(grid[i]).field(pc.values[i]).field(pc.poisson_reference[i]);
    w.end_row();
    const double ref = fraction * pc.poisson_reference[i];
    // With a vanishing reference the deviation is measured against Poisson.
    const double dev = ref > 0.0 ? std::abs(pc.values[i] - ref) / ref : pc.values[i] / pc.poisson_reference[i];
    worst = std::max(worst, dev);
  }
  o.summary["estimates"] = {{"N", pc.N}, {"max_rel_dev", worst}, {"reference_fraction", fraction}};
  if (!r.is("tol", "none")) {
    const double tol = r.real("tol");
    o.summary["checks"]["max_rel_dev"] = {{"value", worst}, {"tol", tol}, {"pass", worst <= tol}};
  }
}

void cmd_capcount(const Resolved& r, unsigned threads, Output& o) {
  const int d = dimension(r);
  const auto L = lattice(r, d);
  const auto sigmas = positive_list(r, "sigma");
  CapCountSpec spec{shell(r), sigmas, positive(r, "samples"), r.seed(), threads};
  const auto D = shell_directions(L, spec.shell, enum_options(r));
  const auto cc = sample_cap_counts(D, spec, sampler(r, d));
  CsvWriter w(o.csv);
  w.header(count_columns(d, sigmas.size()));
  write_counts(w, cc);
  o.summary["estimates"]["points"] = cc.points;
  for (std::size_t j = 0; j < sigmas.size(); ++j) {
    const auto key = "mean_N" + std::to_string(j + 1);
    const auto e = mean_count(cc, static_cast<int>(j));
    o.summary["estimates"][key] = e.mean;
    o.summary["standard_errors"][key] = e.se;
    o.summary["checks"][key] = three_se_check(e, sigmas[j]);
  }
}

std::complex<double> parse_complex(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {parse_scalar(s).value, 0.0};
  return {parse_scalar(s.substr(0, colon)).value, parse_scalar(s.substr(colon + 1)).value};
}

void cmd_moments(const Resolved& r, unsigned threads, Output& o) {
  const int d = dimension(r);
  ShiftVector xi;
  const auto L = lattice(r, d, &xi);
  const auto sigmas = positive_list(r, "sigma");
  const auto sh = shell(r);
  MomentSpec spec;
  spec.sigmas = sigmas;
  spec.samples = positive(r, "samples");
  spec.seed = r.seed();
  spec.threads = threads;
  spec.override_guard = r.flag("override");
  const bool want_mixed = !r.is("z", "none");
  if (want_mixed) {
    for (const auto& part : r.list("z")) spec.z.push_back(parse_complex(part));
    if (spec.z.size() != sigmas.size()) throw UsageError("--z needs one exponent per sigma");
  }
  if (!r.is("K", "none")) {
    spec.K = r.integer("K");
    if (*spec.K < 0) throw UsageError("--K must be non-negative");
  }

  const auto lambda = sampler(r, d);
  CapCountSpec cs{sh, sigmas, spec.samples, spec.seed, threads};
  auto& est = o.summary["estimates"];
  auto& ses = o.summary["standard_errors"];
  auto& checks = o.summary["checks"];
  CapCounts cc;
  if (want_mixed) {
    const auto m = empirical_moment(L, sh, spec, lambda, xi);
    est["mixed_moment"] = {{"re", m.estimate.real()}, {"im", m.estimate.imag()}};
    ses["mixed_moment"] = {{"re", m.se_re}, {"im", m.se_im}};
    if (m.restricted) {
      est["restricted_moment"] = {{"re", m.restricted->real()}, {"im", m.restricted->imag()}};
      ses["restricted_moment"] = {{"re", m.restricted_se_re}, {"im", m.restricted_se_im}};
    }
    const char* kind = m.guard.kind == Hypothesis::A1 ? "A1" : m.guard.kind == Hypothesis::A2 ? "A2" : "unsupported";
    o.summary["hypothesis"] = {{"kind", kind}, {"eta", m.guard.eta}, {"diagnostic", m.guard.diagnostic}};
    o.summary["warnings"] = m.warnings;
    cc = m.counts;
  } else {
    cc = sample_cap_counts(shell_directions(L, sh, enum_options(r)), cs, lambda);
  }
  est["points"] = cc.points;
  for (std::size_t j = 0; j < sigmas.size(); ++j) {
    const auto key = "mean_N" + std::to_string(j + 1);
    const auto e = mean_count(cc, static_cast<int>(j));
    est[key] = e.mean;
    ses[key] = e.se;
    checks[key] = three_se_check(e, sigmas[j]);
  }
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    for (std::size_t j = i + 1; j < sigmas.size(); ++j) {
      const auto key = "mean_N" + std::to_string(i + 1) + "N" + std::to_string(j + 1);
      const auto e = product_moment(cc, static_cast<int>(i), static_cast<int>(j));
      est[key] = e.mean;
      ses[key] = e.se;
      checks[key] = three_se_check(e, sigmas[i] * sigmas[j] + std::min(sigmas[i], sigmas[j]));
    }
  CsvWriter w(o.csv);
  w.header(count_columns(d, sigmas.size()));
  write_counts(w, cc);
}

void cmd_limitdist(const Resolved& r, unsigned threads, Output& o) {
  const int d = dimension(r);
  const auto L = lattice(r, d);
  const auto sigmas = positive_list(r, "sigma");
  CapCountSpec spec{shell(r), sigmas, positive(r, "samples"), r.seed(), threads};
  const auto cc = sample_cap_counts(shell_directions(L, spec.shell, enum_options(r)), spec, sampler(r, d));
  const auto ld = empirical_limit_distribution(cc, r.real("r0"));
  CsvWriter w(o.csv);
  std::vector<std::string> cols;
  for (std::size_t j = 0; j < sigmas.size(); ++j) cols.push_back("N" + std::to_string(j + 1));
  cols.insert(cols.end(), {"count", "prob", "se"});
  w.header(cols);
  double total = 0.0;
  const auto n = static_cast<double>(ld.samples);
  for (const auto& [key, count] : ld.histogram) {
    const double p = static_cast<double>(count) / n;
    total += p;
    for (long long k : key) w.field(k);
    w.field(count).field(p).field(std::sqrt(p * (1.0 - p) / n));
    w.end_row();
  }
  o.summary["estimates"] = {{"points", cc.points}, {"total_probability", total},
                            {"tail_mass", ld.tail_mass.mean}, {"r0", ld.r0}};
  o.summary["standard_errors"]["tail_mass"] = ld.tail_mass.se;
  for (std::size_t j = 0; j < sigmas.size(); ++j)
    o.summary["checks"]["mean_N" + std::to_string(j + 1)] = three_se_check(ld.marginal_means[j], sigmas[j]);
}

void cmd_zeta(const Resolved& r, unsigned threads, Output& o) {
  const int d = dimension(r, 1);
  const auto Ts = positive_list(r, "T");
  ScanLimits lim;
  lim.point_budget = r.real("budget");
  std::vector<ShiftVector> xis;
  if (r.is("xi", "random")) {
    const long long count = positive(r, "count");
    for (long long i = 0; i < count; ++i) {
      auto rng = sample_engine(r.seed(), static_cast<std::uint64_t>(i));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      Eigen::RowVectorXd v(d);
      for (int k = 0; k < d; ++k) v(k) = u(rng);
      xis.emplace_back(v);
    }
  } else {
    xis.push_back(parse_xi(r.raw("xi"), d));
  }
  std::vector<long long> z(xis.size() * Ts.size());
  parallel_for(xis.size(), threads, [&](std::size_t i) {
    for (std::size_t k = 0; k < Ts.size(); ++k) z[i * Ts.size() + k] = zeta(xis[i], Ts[k], lim);
  });
  CsvWriter w(o.csv);
  std::vector<std::string> cols{"index"};
  for (int k = 0; k < d; ++k) cols.push_back("xi" + std::to_string(k + 1));
  cols.insert(cols.end(), {"T", "zeta", "bound"});
  w.header(cols);
  long long violations = 0;
  for (std::size_t i = 0; i < xis.size(); ++i)
    for (std::size_t k = 0; k < Ts.size(); ++k) {
      const long long b = dirichlet_bound(Ts[k], d);
      const long long v = z[i * Ts.size() + k];
      if (v > b) ++violations;
      w.field(static_cast<long long>(i));
      for (int j = 0; j < d; ++j) w.field(xis[i].value(j));
      w.field(Ts[k]).field(v).field(b);
      w.end_row();
    }
  o.summary["estimates"] = {{"evaluations", z.size()}, {"violations", violations}};
  o.summary["checks"]["dirichlet_bound"] = {{"violations", violations}, {"pass", violations == 0}};
  if (z.size() == 1) {
    o.summary["estimates"]["zeta"] = z[0];
    o.plain = std::to_string(z[0]) + "\n";
  }
  o.summary["budgets"] = {{"point_budget", lim.point_budget}};
}

void cmd_brjuno(const Resolved& r, unsigned, Output& o) {
  const int d = dimension(r, 1);
  const auto xi = parse_xi(r.raw("xi"), d);
  ScanLimits lim;
  lim.point_budget = r.real("budget");
  const long long nmax = r.integer("nmax");
  if (nmax < 0 || nmax > 62) throw UsageError("--nmax must lie in [0, 62]");
  const auto b = brjuno_partial(xi, r.real("s"), static_cast<int>(nmax), lim);
  write_brjuno_csv(o.csv, b);
  o.summary["estimates"] = {{"partial_sum", b.partial_sum}, {"terms", b.terms.size()},
                            {"resonance", b.resonance}, {"budget_exhausted", b.budget_exhausted}};
  o.summary["verdict"] = b.verdict;
  const long long L = r.integer("L");
  if (L > 0) {
    const auto v = vaguely_diophantine_partial(xi, r.real("rho"), r.real("mu"), r.real("nu"), static_cast<int>(L), lim);
    std::ostringstream os;
    write_vaguely_csv(os, v);
    o.summary["vaguely"] = {{"partial_sum", v.partial_sum}, {"terms", v.terms.size()}, {"diagnostic", v.diagnostic},
                            {"budget_exhausted", v.budget_exhausted}};
    std::vector<json> rows;
    for (const auto& t : v.terms) rows.push_back({{"l", t.l}, {"zeta", t.zeta}, {"term", t.term}});
    o.summary["vaguely"]["table"] = rows;
  }
}

void cmd_siegel(const Resolved& r, unsigned threads, Output& o) {
  if (r.integer("d") != 2) throw UsageError("siegel-check: only d = 2 is supported");
  const double s1 = r.real("sigma1"), s2 = r.real("sigma2");
  if (!(s1 > 0.0 && s2 > 0.0)) throw UsageError("siegel-check: sigmas must be positive");
  const auto res = siegel_mc_check_d2(s1, s2, positive(r, "samples"), r.seed(), threads);
  CsvWriter w(o.csv);
  w.header({"statistic", "estimate", "se", "reference", "z"});
  w.field("off_diagonal").field(res.off_diagonal.mean).field(res.off_diagonal.se).field(res.off_reference).field(res.z_off);
  w.end_row();
  w.field("diagonal").field(res.diagonal.mean).field(res.diagonal.se).field(res.diag_reference).field(res.z_diag);
  w.end_row();
  o.summary["estimates"] = {{"off_diagonal", res.off_diagonal.mean}, {"diagonal", res.diagonal.mean},
                            {"acceptance_rate", res.acceptance_rate}};
  o.summary["standard_errors"] = {{"off_diagonal", res.off_diagonal.se}, {"diagonal", res.diagonal.se}};
  o.summary["checks"]["off_diagonal"] = three_se_check(res.off_diagonal, res.off_reference);
  o.summary["checks"]["diagonal"] = three_se_check(res.diagonal, res.diag_reference);
}

void cmd_escape(const Resolved& r, unsigned threads, Output& o) {
  const int d = dimension(r);
  EscapeScanSpec spec;
  spec.M0 = base_matrix(r, d);
  spec.xi = parse_xi(r.raw("xi"), d).value;
  spec.eta = r.real("eta");
  spec.r = r.is("r", "auto") ? 0.0 : r.real("r");
  spec.t_list = r.reals("t");
  spec.R_list = r.reals("R");
  if (r.is("psi", "const"))
    spec.psi = PsiKind::Constant;
  else if (r.is("psi", "bump"))
    spec.psi = PsiKind::Bump;
  else
    throw UsageError("--psi: expected const or bump");
  spec.samples = positive(r, "samples");
  spec.seed = r.seed();
  spec.threads = threads;
  const auto res = escape_scan(spec);
  CsvWriter w(o.csv);
  w.header({"t", "R", "estimate", "se"});
  for (const auto& c : res.cells) {
    w.field(c.t).field(c.R).field(c.value.mean).field(c.value.se);
    w.end_row();
  }
  const double first = res.max_over_t.front(), last = res.max_over_t.back();
  const double ratio = first > 0.0 ? last / first : INFINITY;
  o.summary["estimates"] = {{"max_over_t", res.max_over_t}, {"decay_ratio", ratio}, {"r", res.r},
                            {"drops", res.drops}, {"valid", res.valid}};
  if (!r.is("decay_tol", "none")) {
    const double tol = r.real("decay_tol");
    o.summary["checks"]["decay"] = {{"ratio", ratio}, {"tol", tol}, {"first", first},
                                    {"pass", res.valid && first > 0.0 && ratio <= tol}};
  }
}

void cmd_bridge(const Resolved& r, unsigned threads, Output& o) {
  const int d = dimension(r);
  const auto L = lattice(r, d);
  BridgeSpec spec;
  spec.shell = shell(r);
  spec.sigma = r.real("sigma");
  spec.epsilon = r.real("eps");
  spec.samples = positive(r, "samples");
  spec.seed = r.seed();
  spec.threads = threads;
  const auto res = counting_bridge_check(L, spec);
  CsvWriter w(o.csv);
  std::vector<std::string> cols;
  for (int k = 0; k < d; ++k) cols.push_back("v" + std::to_string(k + 1));
  cols.insert(cols.end(), {"lhs", "rhs"});
  w.header(cols);
  for (std::size_t i = 0; i < res.lhs.size(); ++i) {
    for (int k = 0; k < d; ++k) w.field(res.centers(static_cast<Eigen::Index>(i), k));
    w.field(res.lhs[i]).field(res.rhs[i]);
    w.end_row();
  }
  o.summary["estimates"] = {{"violations", res.violations}, {"t", res.t}, {"max_lhs", res.max_lhs},
                            {"max_rhs", res.max_rhs}};
  o.summary["checks"]["no_violations"] = {{"violations", res.violations}, {"pass", res.violations == 0}};
}

std::vector<ParamSpec> shell_params(const char* T_default) {
  std::vector<ParamSpec> p{p_d, p_xi, p_M0, p_c, p_budget};
  p.push_back(T_default ? ParamSpec{"T", T_default, "outer shell radius"}
                        : ParamSpec{"T", std::nullopt, "outer shell radius"});
  return p;
}

std::vector<Command> commands() {
  auto with = [](std::vector<ParamSpec> base, std::vector<ParamSpec> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
  };
  const ParamSpec sigma{"sigma", "1", "comma-separated disc sizes sigma_j"};
  const ParamSpec samples{"samples", "10000", "Monte Carlo samples"};
  return {
      {"enumerate", "list the affine lattice points in a shell", shell_params(nullptr), cmd_enumerate},
      {"paircorr", "pair correlation of directions",
       with(shell_params(nullptr),
            {{"smax", "3", "largest s"},
             {"smin", "auto", "smallest s (default smax/bins)"},
             {"bins", "60", "number of s values"},
             {"region1", "all", "first region: all | hemi:AXIS | cap:THETA:AXIS"},
             {"region2", "all", "second region"},
             {"expect_fraction", "auto", "limit factor vol(D1 cap D2)/vol(S)"},
             {"tol", "none", "tolerance on the relative deviation"}}),
       cmd_paircorr},
      {"capcount", "counts in random discs", with(shell_params(nullptr), {sigma, samples, p_seed, p_lambda}),
       cmd_capcount},
      {"moments", "mixed moments of disc counts",
       with(shell_params(nullptr),
            {sigma, samples, p_seed, p_lambda,
             {"z", "none", "exponents z_j (re or re:im), one per sigma"},
             {"K", "none", "truncation level for the restricted moment"},
             {"override", "false", "proceed when the exponent guard fails"}}),
       cmd_moments},
      {"limitdist", "empirical limit distribution of disc counts",
       with(shell_params(nullptr), {sigma, samples, p_seed, p_lambda, {"r0", "20", "tail threshold"}}),
       cmd_limitdist},
      {"zeta", "Diophantine function zeta(xi, T)",
       {p_d, p_xi, {"T", std::nullopt, "threshold(s) T"}, p_seed, {"count", "1000", "number of random xi"},
        {"budget", "1e9", "bound on scanned integer points"}},
       cmd_zeta},
      {"brjuno", "s-Brjuno and vaguely Diophantine partial sums",
       {p_d, p_xi, {"s", "1", "Brjuno exponent s"}, {"nmax", "10", "last n"},
        {"budget", "1e9", "bound on scanned integer points"}, {"rho", "0", "rho"}, {"mu", "0", "mu"},
        {"nu", "2", "nu"}, {"L", "0", "terms of the vaguely Diophantine sum (0: skip)"}},
       cmd_brjuno},
      {"siegel-check", "Monte Carlo check of the Siegel mean value formula, d = 2",
       {{"d", "2", "dimension (2 only)"}, {"sigma1", "1", "first cone volume"}, {"sigma2", "1", "second cone volume"},
        {"samples", "100000", "Haar samples"}, p_seed},
       cmd_siegel},
      {"escape-scan", "escape of mass along the horosphere",
       {p_d, p_xi, p_M0, {"eta", "2.5", "exponent eta"}, {"r", "auto", "radius r (default d 4^d)"},
        {"t", std::nullopt, "times t"}, {"R", std::nullopt, "thresholds R"}, {"psi", "const", "const | bump"},
        samples, p_seed, {"decay_tol", "none", "bound on max_t value at last R over first R"}},
       cmd_escape},
      {"bridge-check", "check the disc-count to cone-count inequality",
       with(shell_params("100"),
            {{"sigma", "1", "disc size"}, {"eps", "0.5", "cone slack epsilon"}, {"samples", "1000", "sampled v"},
             p_seed}),
       cmd_bridge},
  };
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << data;
  if (!f) throw ResourceError("write to '" + path + "' failed");
}

int run_command(const Command& cmd, const std::map<std::string, std::string>& flags,
                const std::optional<std::string>& config, const std::optional<std::string>& out_prefix,
                const std::optional<std::string>& threads_flag, std::ostream& out) {
  const Resolved r = resolve(cmd.name, cmd.params, flags, config);
  const unsigned threads = resolve_threads(threads_flag);
  Output o;
  CsvWriter header(o.csv);
  header.comment("command = " + cmd.name);
  for (const auto& [k, v] : r.values()) header.comment(k + " = " + v);
  cmd.handler(r, threads, o);
  finish_checks(o);

  json& s = o.summary;
  s["command"] = cmd.name;
  s["config"] = r.values();
  json repro = {{"version", AFFLAT_VERSION}};
  if (r.values().count("seed")) repro["seed"] = r.seed();
  if (r.values().count("budget")) repro["budgets"]["budget"] = r.raw("budget");
  if (s.contains("budgets")) {
    repro["budgets"].update(s["budgets"]);
    s.erase("budgets");
  }
  s["reproducibility"] = repro;

  if (out_prefix) {
    const std::string json_text = s.dump(2) + "\n";
    write_file(*out_prefix + ".csv", o.csv.str());
    write_file(*out_prefix + ".json", json_text);
  } else if (o.plain) {
    out << *o.plain;
  } else {
    out << o.csv.str();
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto cmds = commands();
  CLI::App app{"Directions of affine lattice points: statistics and checks", "afflat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", AFFLAT_VERSION);

  struct Slot {
    const Command* cmd;
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config, out, threads;
    CLI::Option *config_opt, *out_opt, *threads_opt;
  };
  std::vector<Slot> slots(cmds.size());
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto& s = slots[i];
    s.cmd = &cmds[i];
    s.sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    for (const auto& p : cmds[i].params) {
      std::string help = p.help + (p.def ? " [default: " + *p.def + "]" : " (required)");
      s.options[p.name] = s.sub->add_option("--" + p.name, s.values[p.name], help);
    }
    s.config_opt = s.sub->add_option("--config", s.config, "key = value file, CSV or JSON output of an earlier run");
    s.out_opt = s.sub->add_option("--out", s.out, "write PREFIX.csv and PREFIX.json");
    s.threads_opt = s.sub->add_option("--threads", s.threads, "worker threads (output does not depend on it)");
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (auto& s : slots) {
    if (!s.sub->parsed()) continue;
    std::map<std::string, std::string> given;
    for (const auto& [name, opt] : s.options)
      if (opt->count() > 0) given[name] = s.values[name];
    auto opt = [](CLI::Option* o, const std::string& v) { return o->count() > 0 ? std::optional(v) : std::nullopt; };
    try {
      return run_command(*s.cmd, given, opt(s.config_opt, s.config), opt(s.out_opt, s.out),
                         opt(s.threads_opt, s.threads), out);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    } catch (const DomainError& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    } catch (const ResourceError& e) {
      err << "resource limit: " << e.what() << "\n";
      return 3;
    } catch (const NumericError& e) {
      err << "numeric failure: " << e.what() << "\n";
      return 4;
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace afflat::cli

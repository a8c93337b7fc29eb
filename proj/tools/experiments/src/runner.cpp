#include "locball/experiments/runner.hpp"

#include "locball/analysis/bounds.hpp"
#include "locball/analysis/diagnostics.hpp"
#include "locball/analysis/estimators.hpp"
#include "locball/analysis/lemmas.hpp"
#include "locball/analysis/slicing.hpp"
#include "locball/experiments/acceptance.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace locball::experiments {

namespace {

namespace an = locball::analysis;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

ResultRow with_se(const std::string& family, int n, double eps, const std::string& quantity,
                  const std::string& unit, double estimate, double se) {
  return {family, n, eps, quantity, unit, estimate, estimate - an::z95 * se, estimate + an::z95 * se};
}

ResultRow point(const std::string& family, int n, double eps, const std::string& quantity,
                const std::string& unit, double estimate) {
  return {family, n, eps, quantity, unit, estimate, kNaN, kNaN};
}

double lambda_max(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

double ball_radius(const ExperimentConfig& c) { return c.radius > 0.0 ? c.radius : std::sqrt(double(c.dimension)); }

std::vector<double> spectrum_of(const ExperimentConfig& c) {
  std::vector<double> s = c.spectrum.empty() ? std::vector<double>(c.dimension, 1.0) : c.spectrum;
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

// Slack on A_t <= I/t: deterministic backends only carry integration error.
double covariance_slack(const ExperimentConfig& c, Backend backend) {
  return backend == Backend::sampling ? c.tolerances["covariance_slack_sampling"] : c.tolerances["covariance_slack_exact"];
}

struct Context {
  const ExperimentConfig& config;
  Seed seed;
  RunResult result;

  ExperimentOutput& out() { return result.output; }
  const Tolerances& tol() const { return config.tolerances; }
  Seed sub(const std::string& name) const { return named_seed(seed, name); }
};

// ---------------------------------------------------------------------------

void run_reduce(Context& ctx) {
  const auto& c = ctx.config;
  const auto base = Family::from_name(c.family, c.dimension);
  const auto reduced = reduce(base, c.c0_constant, ctx.sub("reduce"));
  const auto& r = reduced.report;
  const int n = c.dimension;
  auto& out = ctx.out();
  out.rows.push_back(with_se(base.name(), n, kNaN, "conditioning mass mu(K)", "probability", r.conditioning_mass,
                             r.conditioning_mass_stderr));
  out.rows.push_back(point(base.name(), n, kNaN, "min eigenvalue of Cov(X_2)", "variance", r.covariance_spectrum_bounds.first));
  out.rows.push_back(point(base.name(), n, kNaN, "max eigenvalue of Cov(X_2)", "variance", r.covariance_spectrum_bounds.second));
  out.rows.push_back(point(base.name(), n, kNaN, "final support radius", "length", r.final_support_radius));

  const double mass_floor = 1.0 - 1.0 / (4.0 * c.c0_constant * c.c0_constant);
  const double z = ctx.tol()["reduction_mass_z"];
  out.verdicts.push_back({"conditioning mass >= 1 - 1/(4 C0^2)",
                          r.conditioning_mass >= mass_floor - z * r.conditioning_mass_stderr,
                          num(r.conditioning_mass, 5) + " vs " + num(mass_floor, 5)});
  const double slack = ctx.tol()["reduction_spectrum_slack"];
  const auto [lo, hi] = r.covariance_spectrum_bounds;
  out.verdicts.push_back({"covariance spectrum in [1/2, 2]", lo >= 0.5 - slack && hi <= 2.0 + slack,
                          "[" + num(lo, 4) + ", " + num(hi, 4) + "]"});
  const double radius_cap = 2.0 * std::sqrt(2.0) * c.c0_constant * std::sqrt(double(n));
  out.verdicts.push_back({"support radius <= 2 sqrt(2) C0 sqrt(n)", r.final_support_radius <= radius_cap * (1.0 + 1e-9),
                          num(r.final_support_radius, 5) + " <= " + num(radius_cap, 5)});
  out.details["report"] = reduction_report_json(r);
  ctx.result.reduction = r;
}

void run_localize(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  const Backend backend = resolve_backend(c, family);
  PathOptions o;
  o.horizon = c.horizon;
  o.dt = c.dt;
  o.backend = backend;
  o.budget = c.budget;
  o.record_every = c.record_every;
  const auto outcomes = run_ensemble_tolerant(family, o, c.paths, ctx.sub("paths"));

  std::vector<std::string> failures;
  for (const auto& oc : outcomes) {
    if (oc.path) ctx.result.paths.push_back(*oc.path);
    else failures.push_back(oc.failure);
  }
  const auto& paths = ctx.result.paths;
  const int n = c.dimension;
  auto& out = ctx.out();

  if (!paths.empty()) {
    const std::size_t records = paths.front().times.size();
    for (std::size_t i = 0; i < records; ++i) {
      double sum = 0.0;
      double sum_sq = 0.0;
      double lmax = 0.0;
      for (const auto& p : paths) {
        const double tr = p.moments[i].covariance.trace();
        sum += tr;
        sum_sq += tr * tr;
        lmax = std::max(lmax, lambda_max(p.moments[i].covariance));
      }
      const double m = static_cast<double>(paths.size());
      const double mean = sum / m;
      const double var = m > 1 ? std::max(0.0, (sum_sq - m * mean * mean) / (m - 1)) : 0.0;
      const double t = paths.front().times[i];
      out.rows.push_back(with_se(family.name(), n, kNaN, "E Tr(A_t) at t=" + num(t), "variance", mean, std::sqrt(var / m)));
      out.rows.push_back(point(family.name(), n, kNaN, "max lambda_max(A_t) at t=" + num(t), "variance", lmax));
    }
  }
  const auto bound = an::covariance_bound_check(paths, covariance_slack(c, backend));
  out.verdicts.push_back({"all paths completed", failures.empty(),
                          std::to_string(failures.size()) + " of " + std::to_string(outcomes.size()) + " failed"});
  out.verdicts.push_back({"lambda_max(A_t) <= 1/t + slack", bound.passed(),
                          std::to_string(bound.violations) + " violations in " + std::to_string(bound.states_checked) + " states"});
  out.details["backend"] = std::string(to_string(backend));
  out.details["failures"] = failures;
}

void run_smallball(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  const int n = c.dimension;
  std::vector<double> radii;
  for (double e : c.epsilons) radii.push_back(std::sqrt(e * n));
  const auto est = an::small_ball_table(family, Vector::Zero(n), radii, c.samples, ctx.sub("samples"));
  auto& out = ctx.out();
  const bool gaussian = family.kind() == FamilyKind::gaussian;
  const double z = ctx.tol()["binomial_z"];
  bool ordered = true;
  int disagreements = 0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    const double eps = c.epsilons[k];
    out.rows.push_back({family.name(), n, eps, "P(|X|^2 <= eps n)", "probability", est[k].p_hat, est[k].ci_low, est[k].ci_high});
    if (!gaussian) continue;
    const auto oracle = an::gaussian_small_ball_oracle(n, eps);
    out.rows.push_back(point(family.name(), n, eps, "exact chi-square value", "probability", oracle.exact));
    out.rows.push_back(point(family.name(), n, eps, "Chernoff bound", "probability", oracle.chernoff));
    ordered = ordered && oracle.exact <= oracle.chernoff;
    const double se = std::sqrt(oracle.exact * (1.0 - oracle.exact) / c.samples);
    if (std::abs(est[k].p_hat - oracle.exact) > z * se + 1.0 / c.samples) ++disagreements;
  }
  bool monotone = true;
  for (std::size_t k = 0; k < est.size(); ++k) {
    for (std::size_t j = 0; j < est.size(); ++j) {
      if (radii[k] > radii[j] && est[k].p_hat < est[j].p_hat) monotone = false;
    }
  }
  out.verdicts.push_back({"estimates monotone in eps", monotone, ""});
  if (gaussian) {
    out.verdicts.push_back({"exact <= Chernoff", ordered, ""});
    out.verdicts.push_back({"agreement with the chi-square value", disagreements == 0,
                            std::to_string(disagreements) + " cells beyond " + num(z) + " se"});
  }
}

void run_bounds(Context& ctx) {
  const auto& c = ctx.config;
  const auto spectrum = spectrum_of(c);
  const int n = static_cast<int>(spectrum.size());
  auto& out = ctx.out();
  const double psi_sq = c.psi_sq > 0.0 ? c.psi_sq : (n >= 2 ? an::psi_sq_log_bound(n, 1.0) : 1.0);
  bool in_range = true;
  nlohmann::json warnings = nlohmann::json::array();
  for (double eps : c.epsilons) {
    an::BoundSpec spec;
    spec.spectrum = spectrum;
    spec.b = c.b;
    spec.epsilon = eps;
    spec.c_universal = c.c_universal;
    spec.psi_sq = psi_sq;
    const double pb = an::paouris_bound(spec);
    const double pp = an::projected_paouris_bound(spec);
    out.rows.push_back(point("", n, eps, "paouris bound", "probability", pb));
    out.rows.push_back(point("", n, eps, "projected paouris bound", "probability", pp));
    in_range = in_range && pb >= 0.0 && pb <= 1.0 && pp >= 0.0;
    if (n >= 2) {
      const double lv = an::lee_vempala_bound(n, eps, c.c_universal, psi_sq);
      out.rows.push_back(point("", n, eps, "lee-vempala bound", "probability", lv));
      in_range = in_range && lv >= 0.0 && lv <= 1.0;
    }
    for (const auto& w : an::bound_warnings(spec)) warnings.push_back(w);
  }
  const int k = an::select_subspace(spectrum);
  const double tr = std::accumulate(spectrum.begin(), spectrum.end(), 0.0);
  out.rows.push_back(point("", n, kNaN, "selected subspace dimension k", "count", k));
  out.verdicts.push_back({"paouris and lee-vempala bounds in [0, 1]", in_range, ""});
  out.verdicts.push_back({"lambda_k >= Tr/(2n)", spectrum[k - 1] >= tr / (2.0 * n),
                          "lambda_k = " + num(spectrum[k - 1]) + ", Tr/(2n) = " + num(tr / (2.0 * n))});
  out.details["warnings"] = warnings;
  out.details["psi_sq"] = psi_sq;
}

void run_verify_martingale(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  an::MartingaleOptions o;
  o.times = c.times;
  o.dt = c.dt;
  o.paths = c.paths;
  o.backend = resolve_backend(c, family);
  o.budget = c.budget;
  o.region_budget = c.region_budget;
  o.reference_samples = c.samples;
  o.record_every = c.record_every;
  o.z_threshold = ctx.tol()["martingale_z"];
  const auto report = an::martingale_check(family, o, ctx.sub("martingale"));
  const int n = c.dimension;
  auto& out = ctx.out();
  std::map<std::string, std::pair<bool, double>> by_function;
  std::vector<std::string> order;
  for (const auto& e : report.entries) {
    out.rows.push_back(with_se(family.name(), n, kNaN, "E[" + e.function + "] at t=" + num(e.time), "mean",
                               e.ensemble_mean, e.ensemble_stderr));
    if (!by_function.count(e.function)) {
      order.push_back(e.function);
      by_function[e.function] = {true, 0.0};
      out.rows.push_back(with_se(family.name(), n, kNaN, "E[" + e.function + "] at t=0", "mean", e.reference, e.reference_stderr));
    }
    auto& f = by_function[e.function];
    f.first = f.first && e.passed;
    f.second = std::max(f.second, std::abs(e.z));
  }
  for (const auto& name : order) {
    out.verdicts.push_back({name, by_function[name].first,
                            "worst |z| " + num(by_function[name].second, 3) + " vs " + num(o.z_threshold)});
  }
  out.details["backend"] = std::string(to_string(o.backend));
}

void run_verify_covbound(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  PathOptions o;
  o.horizon = c.horizon;
  o.dt = c.dt;
  o.backend = resolve_backend(c, family);
  o.budget = c.budget;
  o.record_every = c.record_every;
  const auto paths = run_ensemble(family, o, c.paths, ctx.sub("paths"));
  const double slack = covariance_slack(c, o.backend);
  const auto r = an::covariance_bound_check(paths, slack);
  auto& out = ctx.out();
  out.rows.push_back(point(family.name(), c.dimension, kNaN, "max lambda_max(A_t)-1/t", "excess", r.worst_excess));
  out.rows.push_back(point(family.name(), c.dimension, kNaN, "violations", "count", static_cast<double>(r.violations)));
  out.verdicts.push_back({"lambda_max(A_t) <= 1/t + " + num(slack), r.passed(),
                          std::to_string(r.violations) + " violations in " + std::to_string(r.states_checked) +
                              " states, worst excess " + num(r.worst_excess, 3) + " at t=" + num(r.worst_time, 4)});
}

void run_verify_borell(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  const auto s = an::borell_survey(family, c.exponents, c.directions, c.samples, ctx.sub("borell"));
  auto& out = ctx.out();
  for (std::size_t d = 0; d < c.directions; ++d) {
    for (std::size_t pi = 0; pi < c.exponents.size(); ++pi) {
      const auto& r = s.ratios[d * c.exponents.size() + pi];
      out.rows.push_back(with_se(family.name(), c.dimension, kNaN,
                                 "Borell ratio p=" + num(c.exponents[pi]) + " direction " + std::to_string(d), "ratio",
                                 r.value, r.std_error));
    }
  }
  const double limit = ctx.tol()["borell_ratio_max"];
  out.verdicts.push_back({"Borell ratio <= " + num(limit), s.max_ratio <= limit,
                          "max " + num(s.max_ratio, 4) + " at p=" + num(s.worst_p)});
}

void run_verify_subgaussian(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  const double slack = ctx.tol()["subgaussian_slack"];
  auto& out = ctx.out();
  for (double t : c.t_values) {
    const double v = an::subgaussian_norm(family, t, Vector::Zero(c.dimension), c.p_max, c.samples,
                                          ctx.sub("subgaussian-" + num(t)));
    const double bound = slack / std::sqrt(t);
    out.rows.push_back(point(family.name(), c.dimension, kNaN, "subgaussian norm at t=" + num(t), "norm", v));
    out.verdicts.push_back({"t=" + num(t), v <= bound, num(v, 4) + " <= " + num(bound, 4)});
  }
}

void run_verify_shrinkage(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  an::ShrinkageOptions o;
  o.horizon = c.horizon;
  o.dt = c.dt;
  o.paths = c.paths;
  o.lambda = c.lambda;
  o.backend = resolve_backend(c, family);
  o.budget = c.budget;
  o.region_budget = c.region_budget;
  o.base_samples = c.samples;
  const int n = c.dimension;
  const auto r = an::shrinkage_check(family, Region::centered_ball(n, ball_radius(c)), o, ctx.sub("shrinkage"));
  const double slack = ctx.tol()["shrinkage_z"] * std::hypot(r.mean_log_inverse_gT_stderr, r.g0_stderr / r.g0);
  const double bz = ctx.tol()["binomial_z"];
  auto& out = ctx.out();
  const std::string name = family.name();
  out.rows.push_back(with_se(name, n, kNaN, "g_0", "probability", r.g0, r.g0_stderr));
  out.rows.push_back(with_se(name, n, kNaN, "E log(1/g_T)", "nats", r.mean_log_inverse_gT, r.mean_log_inverse_gT_stderr));
  out.rows.push_back(point(name, n, kNaN, "log(1/g_0) + D^2 T/2", "nats", r.integrated_bound));
  out.rows.push_back(with_se(name, n, kNaN, "event frequency", "probability", r.event_frequency, r.event_stderr));
  out.verdicts.push_back({"integrated bound",
                          std::isfinite(r.mean_log_inverse_gT) && r.mean_log_inverse_gT <= r.integrated_bound + slack,
                          num(r.mean_log_inverse_gT, 4) + " <= " + num(r.integrated_bound, 4) + " + " + num(slack, 3)});
  out.verdicts.push_back({"event frequency", r.event_frequency >= r.event_target - bz * r.event_stderr,
                          num(r.event_frequency, 4) + " vs " + num(r.event_target, 3)});
  out.verdicts.push_back({"no failed paths", r.failed_paths == 0, std::to_string(r.failed_paths)});
  out.details["diameter"] = r.diameter;
}

void run_verify_guan(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  const Backend backend = resolve_backend(c, family);
  const int n = c.dimension;
  const auto r = an::guan_trace_check(family, c.horizon, c.dt, c.paths, backend, c.budget, ctx.sub("guan"));
  auto& out = ctx.out();
  out.rows.push_back(with_se(family.name(), n, kNaN, "E Tr(A_T)/n at T=" + num(c.horizon), "ratio", r.mean_trace / n,
                             r.std_error / n));
  const double gate = ctx.tol()["trace_fraction_min"];
  out.verdicts.push_back({"E Tr(A_T) >= " + num(gate) + " n", an::trace_lower_bound_holds(r, gate),
                          "ratio " + num(r.mean_trace / n, 5) + ", " + std::to_string(r.failed_paths) +
                              " paths stopped by the ESS gate"});
  if (r.failed_paths > 0) out.details["first_failure"] = r.first_failure;
  if (family.kind() == FamilyKind::gaussian) {
    const double exact = 1.0 / (1.0 + c.horizon);
    const double err = std::abs(r.mean_trace / n - exact);
    out.verdicts.push_back({"Gaussian value 1/(1+T)", err <= ctx.tol()["gaussian_exact_abs"], "|error| " + num(err, 3)});
  }
}

void run_verify_subspace(Context& ctx) {
  const auto& c = ctx.config;
  const auto spectrum = spectrum_of(c);
  const int n = static_cast<int>(spectrum.size());
  auto& out = ctx.out();
  const int k = an::select_subspace(spectrum);
  const double tr = std::accumulate(spectrum.begin(), spectrum.end(), 0.0);
  out.rows.push_back(point("", n, kNaN, "selected subspace dimension k", "count", k));
  out.verdicts.push_back({"configured spectrum", spectrum[k - 1] >= tr / (2.0 * n),
                          "k = " + std::to_string(k) + ", lambda_k = " + num(spectrum[k - 1]) + ", Tr/(2n) = " + num(tr / (2.0 * n))});
  Rng rng(ctx.sub("spectra"));
  const int trials = 10'000;
  int violations = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> s(n);
    for (auto& v : s) v = std::exp(6.0 * (rng.uniform() - 0.5));
    std::sort(s.begin(), s.end(), std::greater<>());
    const int j = an::select_subspace(s);
    const double t = std::accumulate(s.begin(), s.end(), 0.0);
    if (j < 1 || j > n || s[j - 1] < t / (2.0 * n)) ++violations;
  }
  out.rows.push_back(point("", n, kNaN, "random spectra violating lambda_k >= Tr/(2n)", "count", violations));
  out.verdicts.push_back({"random spectra", violations == 0,
                          std::to_string(violations) + " violations in " + std::to_string(trials)});
}

void run_certificate(Context& ctx) {
  const auto& c = ctx.config;
  const auto family = build_family(c);
  const int n = c.dimension;
  auto& out = ctx.out();
  an::CertificateOptions o;
  o.c1 = c.c1;
  o.lambda = c.lambda;
  o.dt = c.dt;
  o.paths = c.paths;
  o.budget = c.budget;
  o.region_budget = c.region_budget;
  o.base_samples = c.samples;
  o.c_paouris = c.c_universal;
  o.z_binomial = ctx.tol()["binomial_z"];
  nlohmann::json per_eps = nlohmann::json::array();
  for (double eps : c.epsilons) {
    o.epsilon = eps;
    const auto r = an::assemble_certificate(family, o, ctx.sub("certificate-" + num(eps)));
    const std::string name = family.name();
    const std::string tag = "eps=" + num(eps) + " ";
    out.rows.push_back(with_se(name, n, eps, "P(E0)", "probability", r.p_e0, r.p_e0_stderr));
    out.rows.push_back(point(name, n, eps, "P(E0) target c1^2/2", "probability", r.p_e0_target));
    out.rows.push_back(with_se(name, n, eps, "P(E1)", "probability", r.p_e1, r.p_e1_stderr));
    out.rows.push_back(point(name, n, eps, "P(E1) target 1-1/lambda", "probability", r.p_e1_target));
    out.rows.push_back({name, n, eps, "mu(S_eps)", "probability", r.base_mass.p_hat, r.base_mass.ci_low, r.base_mass.ci_high});
    if (r.implied_bound_available) {
      out.rows.push_back(point(name, n, eps, "implied bound on log mu(S_eps)", "nats", r.log_implied_bound));
    }
    out.verdicts.push_back({tag + "(a) P(E0) >= c1^2/2", r.verdict_e0, num(r.p_e0, 4) + " vs " + num(r.p_e0_target, 4)});
    out.verdicts.push_back({tag + "(b) projected bound on E0", r.verdict_bound,
                            std::to_string(r.bound_violations) + " violations in " + std::to_string(r.bound_checked)});
    out.verdicts.push_back({tag + "(c) P(E1) >= 1-1/lambda", r.verdict_e1, num(r.p_e1, 4) + " vs " + num(r.p_e1_target, 4)});
    per_eps.push_back({{"epsilon", eps},
                       {"diameter", r.diameter},
                       {"ess_failures", r.ess_failures},
                       {"failure_messages", r.failure_messages}});
  }
  out.details["certificates"] = per_eps;
}

void run_slicing(Context& ctx) {
  const auto& c = ctx.config;
  const auto body = an::Body::from_name(c.body);
  const int n = c.dimension;
  an::SlicingOptions so;
  so.samples = c.samples;
  so.c_reference = c.c_reference;
  const auto iso = an::isotropic_constant(body, n, ctx.sub("isotropic"));
  const auto rep = an::slicing_report(body, n, c.slice_epsilons, ctx.sub("slicing"), so);
  auto& out = ctx.out();
  const std::string name = rep.body;
  out.rows.push_back(point(name, n, kNaN, "L_K", "length", iso.L_K));
  out.rows.push_back(point(name, n, kNaN, "L_f", "length", iso.L_f));
  out.rows.push_back(point(name, n, kNaN, "circumradius", "length", iso.circumradius));
  bool monotone = true;
  int disagreements = 0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    out.rows.push_back({name, n, row.epsilon, "Vol(K cap L_K sqrt(eps n) B)", "volume", row.volume, row.ci_low, row.ci_high});
    out.rows.push_back({name, n, row.epsilon, "P(|X|^2 <= eps n), isotropic uniform law", "probability",
                        row.small_ball.p_hat, row.small_ball.ci_low, row.small_ball.ci_high});
    out.rows.push_back(point(name, n, row.epsilon, "reference (C'' sqrt(eps))^n", "volume", row.reference));
    if (i > 0 && row.volume < rep.rows[i - 1].volume) monotone = false;
    if (body.kind == an::Body::Kind::cube && n == 2) {
      const double exact = std::min(1.0, an::square_disc_area(0.5, row.radius));
      out.rows.push_back(point(name, n, row.epsilon, "exact square-disc area", "volume", exact));
      const double se = std::sqrt(exact * (1.0 - exact) / c.samples);
      if (std::abs(row.volume - exact) > ctx.tol()["slicing_z"] * se + 1e-12) ++disagreements;
    }
  }
  out.verdicts.push_back({"volumes monotone in eps", monotone, ""});
  out.verdicts.push_back({"L_f agrees with L_K", std::abs(iso.L_f - iso.L_K) <= ctx.tol()["slicing_exact_abs"],
                          num(iso.L_K, 10) + " vs " + num(iso.L_f, 10)});
  if (body.kind == an::Body::Kind::cube && n == 2) {
    out.verdicts.push_back({"square-disc area", disagreements == 0,
                            std::to_string(disagreements) + " rows beyond " + num(ctx.tol()["slicing_z"]) + " se"});
  }
  out.details["note"] = rep.note;
}

void run_replicate_all(Context& ctx) {
  const auto& c = ctx.config;
  AcceptanceSuite suite(c.seed, c.tolerances);
  std::vector<int> ids = c.criteria;
  if (ids.empty()) {
    for (const auto& [id, title] : AcceptanceSuite::catalog()) ids.push_back(id);
  }
  auto& out = ctx.out();
  nlohmann::json criteria = nlohmann::json::array();
  for (int id : ids) {
    const auto r = suite.run(id);
    const std::string tag = std::string("C") + (id < 10 ? "0" : "") + std::to_string(id) + " ";
    for (auto row : r.output.rows) {
      row.quantity = tag + row.quantity;
      out.rows.push_back(std::move(row));
    }
    for (auto v : r.output.verdicts) {
      v.name = tag + v.name;
      out.verdicts.push_back(std::move(v));
    }
    criteria.push_back({{"id", id}, {"title", r.title}, {"passed", r.passed()}, {"seconds", r.seconds}, {"details", r.output.details}});
  }
  out.details["criteria"] = criteria;
}

using Runner = void (*)(Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"reduce", run_reduce},
      {"localize", run_localize},
      {"smallball", run_smallball},
      {"bounds", run_bounds},
      {"verify.martingale", run_verify_martingale},
      {"verify.covbound", run_verify_covbound},
      {"verify.borell", run_verify_borell},
      {"verify.subgaussian", run_verify_subgaussian},
      {"verify.shrinkage", run_verify_shrinkage},
      {"verify.guan", run_verify_guan},
      {"verify.subspace", run_verify_subspace},
      {"certificate", run_certificate},
      {"slicing", run_slicing},
      {"replicate-all", run_replicate_all},
  };
  return table;
}

}  // namespace

Family build_family(const ExperimentConfig& config) {
  const auto base = Family::from_name(config.family, config.dimension);
  if (config.transform == "symmetrize") return symmetrize(base);
  if (config.transform == "reduce") {
    return reduce(base, config.c0_constant, named_seed(config.seed, "transform-reduce")).family;
  }
  return base;
}

Backend resolve_backend(const ExperimentConfig& config, const Family& family) {
  if (config.backend == "auto") return preferred_backend(family);
  const Backend b = parse_backend(config.backend);
  if (!family.supports(b)) {
    throw Error("localization", "backend " + config.backend + " is not available for family " + family.name());
  }
  return b;
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  Context ctx{config, named_seed(config.seed, config.experiment), {}};
  runners().at(config.experiment)(ctx);
  return std::move(ctx.result);
}

nlohmann::json reduction_report_json(const ReductionReport& report) {
  return {{"c0_constant_used", report.c0_constant_used},
          {"conditioning_mass", report.conditioning_mass},
          {"covariance_spectrum_bounds",
           {report.covariance_spectrum_bounds.first, report.covariance_spectrum_bounds.second}},
          {"final_support_radius", report.final_support_radius}};
}

void write_path_csv(std::ostream& out, const std::vector<LocalizationPath>& paths) {
  out << "path_id,t,theta_norm,a_norm,trace_A,lambda_max_A,ess\r\n";
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      const auto& m = p.moments[i];
      out << p.path_index << ',' << format_number(p.times[i]) << ',' << format_number(p.states[i].theta.norm()) << ','
          << format_number(m.barycenter.norm()) << ',' << format_number(m.covariance.trace()) << ','
          << format_number(lambda_max(m.covariance)) << ',' << format_number(m.ess) << "\r\n";
    }
  }
}

}  // namespace locball::experiments

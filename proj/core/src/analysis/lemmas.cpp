#include "locball/analysis/lemmas.hpp"

#include "locball/analysis/bounds.hpp"
#include "locball/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace locball::analysis {

namespace {

constexpr std::uint64_t kRegionStream = 0x726567696f6e;  // "region"
constexpr std::uint64_t kReferenceStream = 0x726566;     // "ref"

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanAndError mean_and_error(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  if (values.empty()) return {};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

// Index of the recorded state closest to `time`, or npos.
std::size_t recorded_index(const LocalizationPath& path, double time) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_gap = 1e-9 + 1e-6 * time;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    const double gap = std::abs(path.times[i] - time);
    if (gap <= best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

std::size_t gcd_steps(std::size_t record_every, const std::vector<double>& times, double h) {
  std::size_t g = record_every;
  for (double t : times) {
    const auto k = static_cast<std::size_t>(std::llround(t / h));
    g = std::gcd(g, k);
  }
  return std::max<std::size_t>(1, g);
}

}  // namespace

PathOptions martingale_path_options(const MartingaleOptions& options) {
  if (options.times.empty()) throw Error("analysis", "martingale check needs at least one time");
  PathOptions po;
  po.horizon = *std::max_element(options.times.begin(), options.times.end());
  po.dt = options.dt;
  po.backend = options.backend;
  po.budget = options.budget;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(po.horizon / po.dt - 1e-9));
  const double h = po.horizon / static_cast<double>(steps);
  po.record_every = gcd_steps(options.record_every, options.times, h);
  return po;
}

MartingaleReport martingale_check(const Family& family, std::span<const LocalizationPath> paths,
                                  const MartingaleOptions& options, Seed seed) {
  const int n = family.dimension();
  const double ball_radius = std::sqrt(static_cast<double>(n));
  const Region ball = Region::centered_ball(n, ball_radius);

  // t = 0 references: exact where the moments are known.
  MeanAndError ref_linear;
  MeanAndError ref_square;
  if (auto exact = family.exact_moments()) {
    ref_linear = {exact->mean[0], 0.0};
    ref_square = {exact->covariance.trace() + exact->mean.squaredNorm(), 0.0};
  } else {
    const Matrix pts = sample(family, options.reference_samples, derive_seed(seed, {kReferenceStream, 0}));
    std::vector<double> lin(pts.cols());
    std::vector<double> sq(pts.cols());
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      lin[j] = pts(0, j);
      sq[j] = pts.col(j).squaredNorm();
    }
    ref_linear = mean_and_error(lin);
    ref_square = mean_and_error(sq);
  }
  const SmallBallEstimate ref_ball_est = small_ball_estimate(
      family, Vector::Zero(n), ball_radius, options.reference_samples, derive_seed(seed, {kReferenceStream, 1}));
  const MeanAndError ref_ball{ref_ball_est.p_hat, ref_ball_est.std_error()};

  // Product laws are sampled directly under the tilt; others by importance sampling.
  const Backend region_backend = family.coordinate_factor() ? Backend::quadrature : Backend::sampling;

  MartingaleReport report;
  report.passed = true;
  for (std::size_t ti = 0; ti < options.times.size(); ++ti) {
    const double time = options.times[ti];
    std::vector<double> lin(paths.size());
    std::vector<double> sq(paths.size());
    std::vector<double> ind(paths.size());
    parallel_for(paths.size(), [&](std::size_t p) {
      const LocalizationPath& path = paths[p];
      const std::size_t idx = recorded_index(path, time);
      if (idx == std::numeric_limits<std::size_t>::max()) {
        throw Error("analysis", "time " + std::to_string(time) + " was not recorded on the path");
      }
      const TiltedMoments& m = path.moments[idx];
      lin[p] = m.barycenter[0];
      sq[p] = m.covariance.trace() + m.barycenter.squaredNorm();
      ind[p] = measure_under_tilt(family, path.states[idx], ball, options.region_budget,
                                  derive_seed(seed, {kRegionStream, path.path_index, ti}), region_backend)
                   .value;
    });

    auto add = [&](std::string name, std::span<const double> values, MeanAndError ref) {
      const MeanAndError ens = mean_and_error(values);
      MartingaleEntry e;
      e.function = std::move(name);
      e.time = time;
      e.ensemble_mean = ens.mean;
      e.ensemble_stderr = ens.std_error;
      e.reference = ref.mean;
      e.reference_stderr = ref.std_error;
      const double se = std::hypot(ens.std_error, ref.std_error);
      const double diff = ens.mean - ref.mean;
      e.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(1e300, diff));
      e.passed = std::abs(diff) <= options.z_threshold * se;
      report.passed = report.passed && e.passed;
      report.entries.push_back(std::move(e));
    };
    add("x.e1", lin, ref_linear);
    add("|x|^2", sq, ref_square);
    add("1{|x|<=sqrt(n)}", ind, ref_ball);
  }
  return report;
}

MartingaleReport martingale_check(const Family& family, const MartingaleOptions& options, Seed seed) {
  const auto paths = run_ensemble(family, martingale_path_options(options), options.paths, seed);
  return martingale_check(family, paths, options, seed);
}

CovarianceBoundReport covariance_bound_check(std::span<const LocalizationPath> paths, double tolerance) {
  CovarianceBoundReport report;
  for (const auto& path : paths) {
    for (std::size_t i = 0; i < path.times.size(); ++i) {
      const double t = path.times[i];
      if (!(t > 0.0)) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(path.moments[i].covariance, Eigen::EigenvaluesOnly);
      const double excess = eig.eigenvalues().maxCoeff() - 1.0 / t;
      ++report.states_checked;
      if (excess > tolerance) ++report.violations;
      if (excess > report.worst_excess) {
        report.worst_excess = excess;
        report.worst_time = t;
      }
    }
  }
  return report;
}

ShrinkageReport shrinkage_check(const Family& family, const Region& region,
                                const ShrinkageOptions& options, Seed seed) {
  if (!family.bounded()) throw Error("analysis", "shrinkage check needs a family with bounded support");
  if (!(options.lambda > 1.0)) throw Error("analysis", "lambda must exceed 1");
  const int n = family.dimension();

  ShrinkageReport report;
  report.diameter = 2.0 * family.support_radius();
  const double drift_term = report.diameter * report.diameter * options.horizon / 2.0;

  const bool whole = region.shape == Region::Shape::whole_space;
  if (whole) {
    report.g0 = 1.0;
  } else {
    // g_0 by plain Monte Carlo over the base law.
    const std::size_t chunks = (options.base_samples + sample_chunk_size - 1) / sample_chunk_size;
    std::vector<std::size_t> hits(chunks, 0);
    const Seed base_seed = derive_seed(seed, {kReferenceStream});
    parallel_for(chunks, [&](std::size_t c) {
      const std::size_t len = std::min(sample_chunk_size, options.base_samples - c * sample_chunk_size);
      const Matrix pts = sample_chunk(family, base_seed, c, len);
      for (Eigen::Index j = 0; j < pts.cols(); ++j) hits[c] += region.contains(pts.col(j)) ? 1 : 0;
    });
    const std::size_t total = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
    if (total == 0) throw Error("analysis", "g_0 estimate has zero hits; choose a larger region");
    const double N = static_cast<double>(options.base_samples);
    report.g0 = static_cast<double>(total) / N;
    report.g0_stderr = std::sqrt(report.g0 * (1.0 - report.g0) / N);
  }

  PathOptions po;
  po.horizon = options.horizon;
  po.dt = options.dt;
  po.backend = options.backend;
  po.budget = options.budget;
  po.record_every = std::numeric_limits<std::size_t>::max() / 2;
  const auto outcomes = run_ensemble_tolerant(family, po, options.paths, seed);

  std::vector<double> gT(options.paths, std::numeric_limits<double>::quiet_NaN());
  parallel_for(options.paths, [&](std::size_t i) {
    if (!outcomes[i].path) return;
    if (whole) {
      gT[i] = 1.0;
      return;
    }
    try {
      gT[i] = measure_under_tilt(family, outcomes[i].path->states.back(), region, options.region_budget,
                                 derive_seed(seed, {kRegionStream, i}))
                  .value;
    } catch (const EssError&) {
      // left as NaN: counted as a failed path
    }
  });

  std::vector<double> log_inv;
  std::size_t in_event = 0;
  std::size_t valid = 0;
  for (double g : gT) {
    if (std::isnan(g)) {
      ++report.failed_paths;
      continue;
    }
    ++valid;
    log_inv.push_back(g > 0.0 ? -std::log(g) : std::numeric_limits<double>::infinity());
    const double rhs = g > 0.0 ? std::exp(drift_term + std::log(g) / options.lambda) : 0.0;
    if (report.g0 <= rhs) ++in_event;
  }
  report.gT = gT;

  const MeanAndError li = mean_and_error(log_inv);
  report.mean_log_inverse_gT = li.mean;
  report.mean_log_inverse_gT_stderr = li.std_error;
  const double g0_log_se = report.g0 > 0.0 ? report.g0_stderr / report.g0 : 0.0;
  report.integrated_bound = -std::log(report.g0) + drift_term;
  report.integrated_passed =
      std::isfinite(li.mean) &&
      li.mean <= report.integrated_bound + 4.0 * std::hypot(li.std_error, g0_log_se);

  report.event_target = 1.0 - 1.0 / options.lambda;
  if (valid > 0) {
    report.event_frequency = static_cast<double>(in_event) / static_cast<double>(valid);
    report.event_stderr = std::sqrt(report.event_target * (1.0 - report.event_target) / static_cast<double>(valid));
  }
  report.event_passed = valid > 0 && report.event_frequency >= report.event_target - 3.0 * report.event_stderr;
  (void)n;
  return report;
}

GuanResult guan_trace_check(const Family& family, double t_star, double dt, std::size_t paths,
                            Backend backend, std::size_t budget, Seed seed) {
  if (!(t_star > 0.0)) throw Error("analysis", "t_star must be positive");
  PathOptions po;
  po.horizon = t_star;
  po.dt = std::min(dt, t_star);
  po.backend = backend;
  po.budget = budget;
  po.record_every = std::numeric_limits<std::size_t>::max() / 2;
  const auto ensemble = run_ensemble_tolerant(family, po, paths, seed);
  GuanResult r;
  r.paths = paths;
  r.dimension = family.dimension();
  r.t_star = t_star;
  std::vector<double> traces;
  traces.reserve(paths);
  for (const auto& outcome : ensemble) {
    if (outcome.path) {
      traces.push_back(outcome.path->moments.back().covariance.trace());
    } else {
      if (r.failed_paths == 0) r.first_failure = outcome.failure;
      ++r.failed_paths;
    }
  }
  if (!traces.empty()) {
    const MeanAndError me = mean_and_error(traces);
    r.mean_trace = me.mean;
    r.std_error = me.std_error;
  }
  return r;
}

bool trace_lower_bound_holds(const GuanResult& result, double c) {
  return result.failed_paths == 0 && result.mean_trace >= c * result.dimension;
}

CertificateReport assemble_certificate(const Family& family, const CertificateOptions& options, Seed seed) {
  if (!family.bounded()) {
    throw Error("analysis", "certificate needs a bounded-support family (reduce it first)");
  }
  if (!(options.c1 > 0.0 && options.c1 <= 1.0)) throw Error("analysis", "c1 must lie in (0, 1]");
  if (!(options.lambda > 1.0)) throw Error("analysis", "lambda must exceed 1");
  if (!(options.epsilon > 0.0)) throw Error("analysis", "epsilon must be positive");

  const int n = family.dimension();
  CertificateReport r;
  r.dimension = n;
  r.c1 = options.c1;
  r.lambda = options.lambda;
  r.epsilon = options.epsilon;
  r.diameter = 2.0 * family.support_radius();
  r.paths = options.paths;

  const double radius = std::sqrt(options.epsilon * n);
  const Region s_eps = Region::centered_ball(n, radius);
  const double drift_term = r.diameter * r.diameter * options.c1 / 2.0;

  r.base_mass = small_ball_estimate(family, Vector::Zero(n), radius, options.base_samples,
                                    derive_seed(seed, {kReferenceStream}));
  r.base_mass_upper = r.base_mass.hits > 0 ? r.base_mass.p_hat : r.base_mass.ci_high;

  PathOptions po;
  po.horizon = options.c1;
  po.dt = std::min(options.dt, options.c1);
  po.backend = preferred_backend(family);
  po.budget = options.budget;
  po.record_every = std::numeric_limits<std::size_t>::max() / 2;
  const auto outcomes = run_ensemble_tolerant(family, po, options.paths, seed);

  std::vector<CertificatePath> details(options.paths);
  std::vector<std::string> failures(options.paths);
  parallel_for(options.paths, [&](std::size_t i) {
    CertificatePath& d = details[i];
    d.index = i;
    if (!outcomes[i].path) {
      failures[i] = outcomes[i].failure;
      return;
    }
    const LocalizationPath& path = *outcomes[i].path;
    const TiltedMoments& m = path.moments.back();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m.covariance, Eigen::EigenvaluesOnly);
    std::vector<double> spectrum(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    d.trace = m.covariance.trace();
    d.lambda_max = spectrum.front();
    d.in_e0 = d.trace >= options.c1 * n / 2.0;

    try {
      d.tilted_mass = measure_under_tilt(family, path.states.back(), s_eps, options.region_budget,
                                         derive_seed(seed, {kRegionStream, i}));
    } catch (const EssError& e) {
      failures[i] = e.what();
      return;
    }

    if (d.in_e0 && spectrum.back() > 0.0) {
      BoundSpec spec;
      spec.spectrum = spectrum;
      spec.b = 1.0 / std::sqrt(options.c1);
      spec.epsilon = options.epsilon * n / d.trace;
      spec.c_universal = options.c_paouris;
      d.projected_bound = spec.epsilon < 1.0 ? std::min(1.0, projected_paouris_bound(spec)) : 1.0;
      const double lower = d.tilted_mass.value - 3.0 * d.tilted_mass.std_error;
      d.bound_holds = lower <= d.projected_bound;
    }
    const double g = d.tilted_mass.value;
    d.in_e1 = g > 0.0 && std::log(r.base_mass_upper) <= drift_term + std::log(g) / options.lambda;
  });

  std::size_t valid = 0;
  std::size_t e0 = 0;
  std::size_t e1 = 0;
  double best_log_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < options.paths; ++i) {
    if (!failures[i].empty()) {
      ++r.ess_failures;
      r.failure_messages.push_back("path " + std::to_string(i) + ": " + failures[i]);
      continue;
    }
    const CertificatePath& d = details[i];
    ++valid;
    if (d.in_e0) {
      ++e0;
      ++r.bound_checked;
      if (!d.bound_holds) ++r.bound_violations;
    }
    if (d.in_e1) ++e1;
    if (d.in_e0 && d.in_e1) {
      best_log_bound = std::min(best_log_bound, drift_term + std::log(d.projected_bound) / options.lambda);
    }
  }
  r.path_details = std::move(details);

  const double z = options.z_binomial;
  if (valid > 0) {
    const double m = static_cast<double>(valid);
    r.p_e0 = static_cast<double>(e0) / m;
    r.p_e1 = static_cast<double>(e1) / m;
    r.p_e0_target = options.c1 * options.c1 / 2.0;
    r.p_e1_target = 1.0 - 1.0 / options.lambda;
    r.p_e0_stderr = std::sqrt(r.p_e0_target * (1.0 - r.p_e0_target) / m);
    r.p_e1_stderr = std::sqrt(r.p_e1_target * (1.0 - r.p_e1_target) / m);
    r.verdict_e0 = r.p_e0 >= r.p_e0_target - z * r.p_e0_stderr;
    r.verdict_e1 = r.p_e1 >= r.p_e1_target - z * r.p_e1_stderr;
  }
  r.verdict_bound = valid > 0 && r.bound_violations == 0;
  if (std::isfinite(best_log_bound)) {
    r.implied_bound_available = true;
    r.log_implied_bound = best_log_bound;
  }
  return r;
}

}  // namespace locball::analysis

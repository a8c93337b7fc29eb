#include "locball/localization.hpp"

#include "locball/parallel.hpp"
#include "locball/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace locball {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Integration window: the tilted log-density drops this far below its peak
// (72 nats is 12 standard deviations of a Gaussian profile).
constexpr double kTailDrop = 72.0;
constexpr double kQuadratureTol = 1e-10;
constexpr double kQuadratureFailure = 1e-8;

constexpr std::uint64_t kNoiseStream = 0x6e6f697365;  // "noise"
constexpr std::uint64_t kPoolStream = 0x706f6f6c;     // "pool"

void check_state(const TiltState& state, int n) {
  if (state.t < 0.0) throw Error("localization", "tilt time t must be nonnegative");
  if (state.theta.size() != n) throw Error("localization", "tilt vector has the wrong dimension");
}

// Concave profile log h(x) = -t x^2/2 + theta x + log g(x) of one coordinate.
struct TiltedFactor {
  const CoordinateFactor& factor;
  double t;
  double theta;

  double log_profile(double x) const {
    const double g = factor.log_density(x);
    if (g == -kInf) return -kInf;
    return -0.5 * t * x * x + theta * x + g;
  }

  double mode() const {
    using Shape = CoordinateFactor::Shape;
    switch (factor.shape) {
      case Shape::gaussian:
        return theta / (t + 1.0 / (factor.scale * factor.scale));
      case Shape::uniform:
        if (t > 0.0) return std::clamp(theta / t, factor.lo, factor.hi);
        return theta > 0.0 ? factor.hi : (theta < 0.0 ? factor.lo : 0.0);
      case Shape::laplace: {
        const double rate = 1.0 / factor.scale;
        if (t == 0.0) {
          if (std::abs(theta) >= rate) {
            throw QuadratureError("tilted Laplace factor is not integrable at t = 0 with |theta| >= " +
                                      std::to_string(rate),
                                  kInf);
          }
          return 0.0;
        }
        if (theta > rate) return (theta - rate) / t;
        if (theta < -rate) return (theta + rate) / t;
        return 0.0;
      }
    }
    return 0.0;
  }

  double length_scale() const {
    double curvature = t;
    if (factor.shape == CoordinateFactor::Shape::gaussian) curvature += 1.0 / (factor.scale * factor.scale);
    if (curvature > 0.0) return 1.0 / std::sqrt(curvature);
    if (factor.shape == CoordinateFactor::Shape::laplace) {
      return 1.0 / (1.0 / factor.scale - std::abs(theta));
    }
    return factor.hi - factor.lo;
  }

  // Walks outward from the mode until the profile has dropped kTailDrop nats
  // or the support ends.
  double edge(double mode, double peak, double direction) const {
    const double bound = direction > 0 ? factor.hi : factor.lo;
    double step = length_scale();
    for (int k = 0; k < 200; ++k) {
      const double x = mode + direction * step;
      if ((direction > 0 && x >= bound) || (direction < 0 && x <= bound)) return bound;
      if (log_profile(x) < peak - kTailDrop) return x;
      step *= 2.0;
    }
    return mode + direction * step;
  }

  struct Window {
    double mode;
    double peak;
    std::vector<double> breakpoints;
  };

  Window window(double lo_cut = -kInf, double hi_cut = kInf) const {
    Window w;
    w.mode = mode();
    w.peak = log_profile(w.mode);
    double lo = edge(w.mode, w.peak, -1.0);
    double hi = edge(w.mode, w.peak, 1.0);
    lo = std::max(lo, lo_cut);
    hi = std::min(hi, hi_cut);
    w.breakpoints.push_back(lo);
    if (factor.shape == CoordinateFactor::Shape::laplace && lo < 0.0 && 0.0 < hi) {
      w.breakpoints.push_back(0.0);
    }
    w.breakpoints.push_back(hi);
    return w;
  }
};

}  // namespace

FactorMoments tilted_factor_moments(const CoordinateFactor& factor, double t, double theta) {
  const TiltedFactor tf{factor, t, theta};
  const auto w = tf.window();
  const double mode = w.mode;
  const double peak = w.peak;
  auto integrand = [&](double x) {
    const double dx = x - mode;
    const double h = std::exp(tf.log_profile(x) - peak);
    return std::array<double, 3>{h, h * dx, h * dx * dx};
  };
  const auto result = integrate_piecewise<3>(integrand, w.breakpoints, kQuadratureTol);
  if (!result.converged && result.error_estimate > kQuadratureFailure) {
    std::ostringstream msg;
    msg << "quadrature did not converge (error estimate " << result.error_estimate << ")";
    throw QuadratureError(msg.str(), result.error_estimate);
  }
  const double z = result.values[0];
  const double m1 = result.values[1] / z;
  const double m2 = result.values[2] / z;
  return {mode + m1, std::max(0.0, m2 - m1 * m1), result.error_estimate};
}

double tilted_factor_probability(const CoordinateFactor& factor, double t, double theta, double lo,
                                 double hi) {
  const TiltedFactor tf{factor, t, theta};
  const auto whole = tf.window();
  auto integrand = [&](double x) {
    return std::array<double, 1>{std::exp(tf.log_profile(x) - whole.peak)};
  };
  const double total = integrate_piecewise<1>(integrand, whole.breakpoints, kQuadratureTol).values[0];

  std::vector<double> points;
  const double a = std::max(lo, whole.breakpoints.front());
  const double b = std::min(hi, whole.breakpoints.back());
  if (!(b > a)) return 0.0;
  points.push_back(a);
  for (double p : whole.breakpoints) {
    if (p > a && p < b) points.push_back(p);
  }
  points.push_back(b);
  const double part = integrate_piecewise<1>(integrand, points, kQuadratureTol).values[0];
  return std::clamp(part / total, 0.0, 1.0);
}

SamplePool make_pool(const Family& family, std::size_t budget, Seed seed) {
  if (budget == 0) throw Error("localization", "sampling backend needs a positive budget");
  SamplePool pool;
  pool.points = sample(family, budget, seed);
  pool.squared_norms = pool.points.colwise().squaredNorm().transpose();
  return pool;
}

Vector importance_weights(const SamplePool& pool, const TiltState& state) {
  Vector logw = (pool.points.transpose() * state.theta) - 0.5 * state.t * pool.squared_norms;
  const double max_log = logw.maxCoeff();
  Vector w = (logw.array() - max_log).exp().matrix();
  w /= w.sum();
  return w;
}

double effective_sample_size(const Vector& normalized_weights) {
  return 1.0 / normalized_weights.squaredNorm();
}

namespace {

void require_ess(double ess, std::size_t budget) {
  const double floor = static_cast<double>(budget) / 100.0;
  if (ess < floor) {
    std::ostringstream msg;
    msg << "effective sample size " << ess << " is below budget/100 = " << floor
        << "; the tilt is too far from the base law for importance sampling";
    throw EssError(msg.str(), ess);
  }
}

TiltedMoments closed_form_moments(const Family& family, const TiltState& state) {
  const auto params = family.gaussian_parameters();
  if (!params) {
    throw Error("localization", "closed_form backend is only legal for Gaussian laws, not " + family.name());
  }
  const int n = family.dimension();
  TiltedMoments m;
  m.backend = Backend::closed_form;
  m.barycenter_stderr = Vector::Zero(n);
  if (params->mean.isZero(0.0) && params->covariance.isIdentity(0.0)) {
    const double s = 1.0 / (1.0 + state.t);
    m.barycenter = s * state.theta;
    m.covariance = s * Matrix::Identity(n, n);
    return m;
  }
  // N(mu, S) tilted: precision S^{-1} + tI, mean A (S^{-1} mu + theta).
  const Eigen::LLT<Matrix> cov_llt(params->covariance);
  const Matrix precision = cov_llt.solve(Matrix::Identity(n, n)) + state.t * Matrix::Identity(n, n);
  const Eigen::LLT<Matrix> prec_llt(precision);
  m.covariance = prec_llt.solve(Matrix::Identity(n, n));
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose());
  m.barycenter = prec_llt.solve(cov_llt.solve(params->mean) + state.theta);
  return m;
}

TiltedMoments quadrature_moments(const Family& family, const TiltState& state) {
  const auto factor = family.coordinate_factor();
  if (!factor) {
    throw Error("localization",
                "quadrature backend is only legal for coordinate-product laws, not " + family.name());
  }
  const int n = family.dimension();
  TiltedMoments m;
  m.backend = Backend::quadrature;
  m.barycenter = Vector::Zero(n);
  m.covariance = Matrix::Zero(n, n);
  m.barycenter_stderr = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const FactorMoments fm = tilted_factor_moments(*factor, state.t, state.theta[i]);
    m.barycenter[i] = fm.mean;
    m.covariance(i, i) = fm.variance;
    m.quadrature_error += fm.error_estimate;
  }
  return m;
}

}  // namespace

TiltedMoments tilted_moments(const SamplePool& pool, const TiltState& state) {
  const Vector w = importance_weights(pool, state);
  const double ess = effective_sample_size(w);
  require_ess(ess, pool.size());

  TiltedMoments m;
  m.backend = Backend::sampling;
  m.ess = ess;
  m.barycenter = pool.points * w;
  const Matrix centered = pool.points.colwise() - m.barycenter;
  const Matrix weighted = centered * w.asDiagonal();
  m.covariance = weighted * centered.transpose();
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose());
  m.barycenter_stderr = (weighted.array().square().rowwise().sum()).sqrt().matrix();
  return m;
}

TiltedMoments tilted_moments(const Family& family, const TiltState& state, Backend backend,
                             std::size_t budget, Seed seed) {
  check_state(state, family.dimension());
  if (!family.supports(backend)) {
    throw Error("localization", "backend " + std::string(to_string(backend)) + " is not legal for " +
                                    family.name());
  }
  switch (backend) {
    case Backend::closed_form: return closed_form_moments(family, state);
    case Backend::quadrature: return quadrature_moments(family, state);
    case Backend::sampling: return tilted_moments(make_pool(family, budget, seed), state);
  }
  throw Error("localization", "unknown backend");
}

Backend preferred_backend(const Family& family) noexcept {
  if (family.supports(Backend::closed_form)) return Backend::closed_form;
  if (family.supports(Backend::quadrature)) return Backend::quadrature;
  return Backend::sampling;
}

TiltState step(const TiltState& state, const Vector& drift, double dt, const Vector& noise) {
  if (!(dt > 0.0)) throw Error("localization", "time step must be positive");
  if (noise.size() != state.theta.size() || drift.size() != state.theta.size()) {
    throw Error("localization", "noise and drift must match the tilt dimension");
  }
  return {state.t + dt, state.theta + dt * drift + noise};
}

TiltState step(const Family& family, const TiltState& state, double dt, const Vector& noise,
               Backend backend, std::size_t budget, Seed seed) {
  const TiltedMoments m = tilted_moments(family, state, backend, budget, seed);
  return step(state, m.barycenter, dt, noise);
}

Vector brownian_increment(int dimension, double dt, Seed seed, std::size_t path_index,
                          std::size_t step_index) {
  Rng rng(seed, {kNoiseStream, path_index, step_index});
  Vector noise(dimension);
  const double scale = std::sqrt(dt);
  for (int i = 0; i < dimension; ++i) noise[i] = scale * rng.normal();
  return noise;
}

LocalizationPath run_path(const Family& family, const PathOptions& options, Seed seed,
                          std::size_t path_index) {
  if (!(options.horizon > 0.0) || !(options.dt > 0.0)) {
    throw Error("localization", "horizon and dt must be positive");
  }
  if (options.dt > options.horizon) throw Error("localization", "dt must not exceed the horizon");
  if (!family.supports(options.backend)) {
    throw Error("localization", "backend " + std::string(to_string(options.backend)) +
                                    " is not legal for " + family.name());
  }
  const std::size_t record_every = std::max<std::size_t>(1, options.record_every);
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(options.horizon / options.dt - 1e-9));
  const double h = options.horizon / static_cast<double>(steps);
  const int n = family.dimension();

  std::optional<SamplePool> pool;
  if (options.backend == Backend::sampling) {
    pool = make_pool(family, options.budget, derive_seed(seed, {kPoolStream, path_index}));
  }
  auto moments_at = [&](const TiltState& s) {
    return pool ? tilted_moments(*pool, s) : tilted_moments(family, s, options.backend);
  };

  LocalizationPath path;
  path.seed = seed;
  path.path_index = path_index;
  path.family = family;

  TiltState state = TiltState::origin(n);
  for (std::size_t k = 0;; ++k) {
    TiltedMoments m = moments_at(state);
    if (k % record_every == 0 || k == steps) {
      path.times.push_back(state.t);
      path.states.push_back(state);
      path.moments.push_back(m);
    }
    if (k == steps) break;
    state = step(state, m.barycenter, h, brownian_increment(n, h, seed, path_index, k));
    state.t = static_cast<double>(k + 1) * h;
  }
  return path;
}

std::vector<LocalizationPath> run_ensemble(const Family& family, const PathOptions& options,
                                           std::size_t paths, Seed seed) {
  std::vector<LocalizationPath> out(paths);
  parallel_for(paths, [&](std::size_t i) { out[i] = run_path(family, options, seed, i); });
  return out;
}

std::vector<PathOutcome> run_ensemble_tolerant(const Family& family, const PathOptions& options,
                                               std::size_t paths, Seed seed) {
  std::vector<PathOutcome> out(paths);
  parallel_for(paths, [&](std::size_t i) {
    try {
      out[i].path = run_path(family, options, seed, i);
    } catch (const EssError& e) {
      out[i].failure = e.what();
    } catch (const QuadratureError& e) {
      out[i].failure = e.what();
    }
  });
  return out;
}

Region Region::ball(Vector center, double radius) {
  if (radius < 0.0) throw Error("localization", "ball radius must be nonnegative");
  Region r;
  r.shape = Shape::ball;
  r.center = std::move(center);
  r.radius = radius;
  return r;
}

Region Region::centered_ball(int dimension, double radius) {
  return ball(Vector::Zero(dimension), radius);
}

Region Region::halfspace(Vector normal, double offset) {
  if (normal.isZero(0.0)) throw Error("localization", "halfspace normal must be nonzero");
  Region r;
  r.shape = Shape::halfspace;
  r.normal = std::move(normal);
  r.offset = offset;
  return r;
}

bool Region::contains(const Eigen::Ref<const Vector>& x) const {
  switch (shape) {
    case Shape::whole_space: return true;
    case Shape::ball: return (x - center).squaredNorm() <= radius * radius;
    case Shape::halfspace: return normal.dot(x) >= offset;
  }
  return false;
}

std::string Region::describe() const {
  std::ostringstream s;
  switch (shape) {
    case Shape::whole_space: s << "whole_space"; break;
    case Shape::ball: s << "ball(|center|=" << center.norm() << ",r=" << radius << ")"; break;
    case Shape::halfspace: s << "halfspace(offset=" << offset << ")"; break;
  }
  return s.str();
}

Matrix sample_tilted_product(const Family& family, const TiltState& state, std::size_t count, Seed seed) {
  check_state(state, family.dimension());
  const auto factor = family.coordinate_factor();
  if (!factor) throw Error("localization", "direct tilted sampling needs a coordinate-product law");
  const int n = family.dimension();
  constexpr std::size_t cells = 4096;
  Matrix out(n, static_cast<Eigen::Index>(count));
  std::vector<double> grid;
  std::vector<double> cdf;
  for (int i = 0; i < n; ++i) {
    const TiltedFactor tf{*factor, state.t, state.theta[i]};
    const auto w = tf.window();
    // Grid over each window segment, cells split by segment length.
    grid.clear();
    const double span = w.breakpoints.back() - w.breakpoints.front();
    for (std::size_t k = 0; k + 1 < w.breakpoints.size(); ++k) {
      const double a = w.breakpoints[k];
      const double b = w.breakpoints[k + 1];
      const auto m = std::max<std::size_t>(16, static_cast<std::size_t>(cells * (b - a) / span));
      for (std::size_t j = 0; j < m; ++j) grid.push_back(a + (b - a) * static_cast<double>(j) / m);
    }
    grid.push_back(w.breakpoints.back());
    cdf.assign(grid.size(), 0.0);
    double prev = std::exp(tf.log_profile(grid[0]) - w.peak);
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double cur = std::exp(tf.log_profile(grid[j]) - w.peak);
      cdf[j] = cdf[j - 1] + 0.5 * (prev + cur) * (grid[j] - grid[j - 1]);
      prev = cur;
    }
    const double total = cdf.back();
    if (!(total > 0.0)) throw Error("localization", "tilted coordinate has no mass");
    Rng rng(seed, {static_cast<std::uint64_t>(i)});
    for (std::size_t c = 0; c < count; ++c) {
      const double u = rng.uniform() * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, cdf.size() - 1);
      const double width = cdf[j] - cdf[j - 1];
      const double frac = width > 0.0 ? (u - cdf[j - 1]) / width : 0.5;
      out(i, static_cast<Eigen::Index>(c)) = grid[j - 1] + frac * (grid[j] - grid[j - 1]);
    }
  }
  return out;
}

ProbabilityEstimate measure_under_tilt(const SamplePool& pool, const TiltState& state,
                                       const Region& region) {
  if (region.shape == Region::Shape::whole_space) return {1.0, 0.0, static_cast<double>(pool.size()), pool.size()};
  const Vector w = importance_weights(pool, state);
  const double ess = effective_sample_size(w);
  require_ess(ess, pool.size());

  const Eigen::Index count = pool.points.cols();
  Eigen::Array<bool, Eigen::Dynamic, 1> inside(count);
  if (region.shape == Region::Shape::ball) {
    inside = (pool.points.colwise() - region.center).colwise().squaredNorm().transpose().array() <=
             region.radius * region.radius;
  } else {
    inside = (pool.points.transpose() * region.normal).array() >= region.offset;
  }
  double p = 0.0;
  std::size_t hits = 0;
  for (Eigen::Index j = 0; j < count; ++j) {
    if (inside[j]) {
      p += w[j];
      ++hits;
    }
  }
  double var = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    const double d = (inside[j] ? 1.0 : 0.0) - p;
    var += w[j] * w[j] * d * d;
  }
  return {p, std::sqrt(var), ess, hits};
}

ProbabilityEstimate measure_under_tilt(const Family& family, const TiltState& state,
                                       const Region& region, std::size_t budget, Seed seed,
                                       Backend backend) {
  check_state(state, family.dimension());
  if (region.shape == Region::Shape::whole_space) return {1.0, 0.0, 0.0, 0};
  if (backend == Backend::quadrature) {
    const auto factor = family.coordinate_factor();
    if (!factor) throw Error("localization", "quadrature region mass needs a coordinate-product law");
    Eigen::Index axis = -1;
    bool aligned = region.shape == Region::Shape::halfspace;
    for (Eigen::Index i = 0; aligned && i < region.normal.size(); ++i) {
      if (region.normal[i] != 0.0) {
        if (axis >= 0) aligned = false;
        axis = i;
      }
    }
    if (!aligned || axis < 0) {
      if (budget == 0) throw Error("localization", "direct tilted sampling needs a positive budget");
      const Matrix pts = sample_tilted_product(family, state, budget, seed);
      std::size_t hits = 0;
      for (Eigen::Index j = 0; j < pts.cols(); ++j) hits += region.contains(pts.col(j)) ? 1 : 0;
      const double n = static_cast<double>(budget);
      const double p = static_cast<double>(hits) / n;
      return {p, std::sqrt(p * (1.0 - p) / n), n, hits};
    }
    const double cut = region.offset / region.normal[axis];
    const double p = region.normal[axis] > 0
                         ? tilted_factor_probability(*factor, state.t, state.theta[axis], cut, kInf)
                         : tilted_factor_probability(*factor, state.t, state.theta[axis], -kInf, cut);
    return {p, 0.0, 0.0, 0};
  }
  if (backend != Backend::sampling) {
    throw Error("localization", "region mass supports the sampling and quadrature backends");
  }
  return measure_under_tilt(make_pool(family, budget, seed), state, region);
}

}  // namespace locball

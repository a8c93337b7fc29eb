#include "locball/analysis/slicing.hpp"

#include "locball/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

namespace locball::analysis {

namespace {

constexpr std::uint64_t kMomentStream = 1;
constexpr std::uint64_t kSliceStream = 2;
constexpr std::uint64_t kSmallBallStream = 3;

double log_unit_ball_volume(int n) {
  return 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
}

Family isotropic_family(Body::Kind kind, int n) {
  switch (kind) {
    case Body::Kind::cube: return Family::uniform_cube(n);
    case Body::Kind::ball: return Family::uniform_ball(n);
    case Body::Kind::simplex: return Family::uniform_simplex(n);
    case Body::Kind::polytope: break;
  }
  throw Error("analysis", "no closed-form family for an explicit polytope");
}

// Volume and covariance of the simplex with the given n + 1 vertices.
void simplex_moments(const Matrix& v, double& volume, Vector& barycenter, Matrix& covariance) {
  const int n = static_cast<int>(v.rows());
  Matrix edges(n, n);
  for (int j = 0; j < n; ++j) edges.col(j) = v.col(j + 1) - v.col(0);
  volume = std::abs(edges.determinant()) / std::tgamma(n + 1.0);
  barycenter = v.rowwise().mean();
  const Matrix centered = v.colwise() - barycenter;
  covariance = centered * centered.transpose() / ((n + 1.0) * (n + 2.0));
}

struct BoxSampler {
  const Matrix& vertices;
  const std::vector<Facet>& facets;
  Vector lo;
  Vector hi;

  bool inside(const Eigen::Ref<const Vector>& x) const {
    for (const auto& f : facets) {
      if (f.normal.dot(x) > f.offset + 1e-12) return false;
    }
    return true;
  }
  double box_volume() const { return (hi - lo).prod(); }
  void draw(Rng& rng, Eigen::Ref<Vector> out) const {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = rng.uniform(lo[i], hi[i]);
  }
};

struct RawMoments {
  std::size_t proposals = 0;
  std::size_t hits = 0;
  Vector sum;
  Matrix sum_outer;

  explicit RawMoments(int n) : sum(Vector::Zero(n)), sum_outer(Matrix::Zero(n, n)) {}
  void merge(const RawMoments& o) {
    proposals += o.proposals;
    hits += o.hits;
    sum += o.sum;
    sum_outer += o.sum_outer;
  }
};

struct PolytopeMoments {
  double volume = 0.0;
  Vector barycenter;
  Matrix covariance;
};

PolytopeMoments finish(const RawMoments& m, double box_volume) {
  if (m.hits < 2) throw Error("analysis", "polytope Monte Carlo produced fewer than two interior points");
  const double k = static_cast<double>(m.hits);
  PolytopeMoments out;
  out.volume = box_volume * k / static_cast<double>(m.proposals);
  out.barycenter = m.sum / k;
  out.covariance = (m.sum_outer - k * out.barycenter * out.barycenter.transpose()) / (k - 1.0);
  return out;
}

double lk_from(const PolytopeMoments& m) {
  const double n = static_cast<double>(m.barycenter.size());
  return std::sqrt(m.covariance.trace() / n) * std::pow(m.volume, -1.0 / n);
}

void check_proportional(const Matrix& covariance, double tol) {
  const double n = static_cast<double>(covariance.rows());
  const double scale = covariance.trace() / n;
  const double deviation = (covariance / scale - Matrix::Identity(covariance.rows(), covariance.cols()))
                               .cwiseAbs()
                               .maxCoeff();
  if (deviation > tol) {
    std::ostringstream os;
    os << "body is not in isotropic position: covariance deviates from a multiple of the identity by "
       << deviation << " (tolerance " << tol << "); map it with to_isotropic_position first";
    throw Error("analysis", os.str());
  }
}

}  // namespace

Body Body::from_name(std::string_view name) {
  if (name == "cube") return cube();
  if (name == "ball") return ball();
  if (name == "simplex") return simplex();
  throw Error("analysis", "unknown body '" + std::string(name) + "' (expected cube, ball, simplex)");
}

std::string Body::name() const {
  switch (kind) {
    case Kind::cube: return "cube";
    case Kind::ball: return "ball";
    case Kind::simplex: return "simplex";
    case Kind::polytope: return "polytope";
  }
  return "?";
}

Matrix regular_simplex_vertices(int n) {
  if (n < 1) throw Error("analysis", "dimension must be positive");
  // Helmert basis of the sum-zero hyperplane applied to e_0..e_n.
  Matrix v = Matrix::Zero(n, n + 1);
  for (int k = 1; k <= n; ++k) {
    const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
    for (int j = 0; j < k; ++j) v(k - 1, j) = 1.0 / norm;
    v(k - 1, k) = -static_cast<double>(k) / norm;
  }
  return v;
}

std::vector<Facet> polytope_facets(const Matrix& vertices) {
  const int n = static_cast<int>(vertices.rows());
  const int m = static_cast<int>(vertices.cols());
  if (n < 1 || m < n + 1) throw Error("analysis", "a polytope needs at least n + 1 vertices");
  const double scale = vertices.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * std::max(1.0, scale);

  std::vector<Facet> facets;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    Matrix diffs(n - 1 > 0 ? n - 1 : 0, n);
    for (int r = 1; r < n; ++r) diffs.row(r - 1) = (vertices.col(idx[r]) - vertices.col(idx[0])).transpose();
    Vector normal;
    if (n == 1) {
      normal = Vector::Ones(1);
    } else {
      Eigen::FullPivLU<Matrix> lu(diffs);
      if (lu.rank() == n - 1) normal = lu.kernel().col(0).normalized();
    }
    if (normal.size() == n) {
      const double offset = normal.dot(vertices.col(idx[0]));
      const Vector side = vertices.transpose() * normal - Vector::Constant(m, offset);
      int sign = 0;
      if (side.maxCoeff() <= tol) sign = 1;
      else if (side.minCoeff() >= -tol) sign = -1;
      if (sign != 0 && (side.maxCoeff() - side.minCoeff()) > tol) {
        Facet f{sign * normal, sign * offset};
        const bool duplicate = std::any_of(facets.begin(), facets.end(), [&](const Facet& g) {
          return (g.normal - f.normal).norm() < 1e-9 && std::abs(g.offset - f.offset) < tol;
        });
        if (!duplicate) facets.push_back(std::move(f));
      }
    }
    // next n-combination of 0..m-1
    int i = n - 1;
    while (i >= 0 && idx[i] == m - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (static_cast<int>(facets.size()) < n + 1) {
    throw Error("analysis", "vertices do not span a full-dimensional polytope");
  }
  return facets;
}

double density_constant(const Family& family) {
  const auto log_norm = family.log_normalizer();
  if (!log_norm) throw Error("analysis", "family '" + family.name() + "' has no normalized density");
  const int n = family.dimension();
  return std::exp((family.log_density(Vector::Zero(n)) + *log_norm) / n);
}

namespace {

struct PolytopeRun {
  PolytopeMoments pooled;
  std::vector<double> batch_lk;
};

PolytopeRun polytope_moments(const Matrix& vertices, std::size_t budget, std::size_t batches, Seed seed) {
  const int n = static_cast<int>(vertices.rows());
  const auto facets = polytope_facets(vertices);
  BoxSampler box{vertices, facets, vertices.rowwise().minCoeff(), vertices.rowwise().maxCoeff()};
  batches = std::max<std::size_t>(1, batches);
  const std::size_t per_batch = std::max<std::size_t>(1, budget / batches);
  const std::size_t chunks_per_batch = (per_batch + sample_chunk_size - 1) / sample_chunk_size;

  std::vector<RawMoments> raw(batches, RawMoments(n));
  // Chunks are accumulated per batch in a fixed order.
  parallel_for(batches, [&](std::size_t b) {
    RawMoments acc(n);
    Vector x(n);
    for (std::size_t c = 0; c < chunks_per_batch; ++c) {
      const std::size_t chunk = b * chunks_per_batch + c;
      const std::size_t len = std::min(sample_chunk_size, per_batch - c * sample_chunk_size);
      Rng rng(seed, {chunk});
      for (std::size_t i = 0; i < len; ++i) {
        box.draw(rng, x);
        ++acc.proposals;
        if (!box.inside(x)) continue;
        ++acc.hits;
        acc.sum += x;
        acc.sum_outer.noalias() += x * x.transpose();
      }
    }
    raw[b] = std::move(acc);
  });

  PolytopeRun run;
  RawMoments total(n);
  for (const auto& r : raw) {
    total.merge(r);
    if (batches > 1) run.batch_lk.push_back(lk_from(finish(r, box.box_volume())));
  }
  run.pooled = finish(total, box.box_volume());
  return run;
}

}  // namespace

IsotropicConstant isotropic_constant(const Body& body, int n, Seed seed, const IsotropicOptions& options) {
  if (n < 1) throw Error("analysis", "dimension must be positive");
  IsotropicConstant out;
  const double dn = static_cast<double>(n);

  if (body.kind == Body::Kind::polytope) {
    if (body.vertices.rows() != n) throw Error("analysis", "vertex dimension does not match n");
    const PolytopeRun run =
        polytope_moments(body.vertices, options.budget, options.batches, derive_seed(seed, {kMomentStream}));
    const PolytopeMoments& m = run.pooled;
    const double s = std::pow(m.volume, -1.0 / dn);
    out.input_volume = m.volume;
    out.covariance = s * s * m.covariance;
    check_proportional(out.covariance, options.proportionality_tol);
    out.L_K = lk_from(m);
    out.L_f = std::pow(m.covariance.determinant(), 0.5 / dn) * s;
    if (std::abs(out.L_f - out.L_K) > options.proportionality_tol * out.L_K) {
      throw Error("analysis", "density constant disagrees with L_K; body is not in isotropic position");
    }
    if (run.batch_lk.size() > 1) {
      const double b = static_cast<double>(run.batch_lk.size());
      const double mean = std::accumulate(run.batch_lk.begin(), run.batch_lk.end(), 0.0) / b;
      double ss = 0.0;
      for (double v : run.batch_lk) ss += (v - mean) * (v - mean);
      out.std_error = std::sqrt(ss / (b - 1.0) / b);
    }
    double r = 0.0;
    for (Eigen::Index j = 0; j < body.vertices.cols(); ++j) {
      r = std::max(r, (body.vertices.col(j) - m.barycenter).norm());
    }
    out.circumradius = r * s;
    return out;
  }

  out.exact = true;
  switch (body.kind) {
    case Body::Kind::cube:
      // [-1/2, 1/2]^n
      out.input_volume = 1.0;
      out.covariance = Matrix::Identity(n, n) / 12.0;
      out.circumradius = 0.5 * std::sqrt(dn);
      break;
    case Body::Kind::ball: {
      // unit ball scaled to radius r with omega_n r^n = 1
      const double log_vol = log_unit_ball_volume(n);
      const double r = std::exp(-log_vol / dn);
      out.input_volume = std::exp(log_vol);
      out.covariance = Matrix::Identity(n, n) * (r * r / (dn + 2.0));
      out.circumradius = r;
      break;
    }
    case Body::Kind::simplex: {
      const Matrix v = regular_simplex_vertices(n);
      double volume = 0.0;
      Vector bary;
      Matrix cov;
      simplex_moments(v, volume, bary, cov);
      const double s = std::pow(volume, -1.0 / dn);
      out.input_volume = volume;
      out.covariance = s * s * cov;
      out.circumradius = s * (v.col(0) - bary).norm();
      break;
    }
    case Body::Kind::polytope: break;
  }
  check_proportional(out.covariance, options.proportionality_tol);
  out.L_K = std::sqrt(out.covariance.trace() / dn);
  out.L_f = density_constant(isotropic_family(body.kind, n));
  if (std::abs(out.L_f - out.L_K) > options.agreement_tol) {
    std::ostringstream os;
    os << "L_f = " << out.L_f << " disagrees with L_K = " << out.L_K;
    throw Error("analysis", os.str());
  }
  return out;
}

Matrix to_isotropic_position(const Matrix& vertices, std::size_t budget, Seed seed) {
  const int n = static_cast<int>(vertices.rows());
  const PolytopeRun run = polytope_moments(vertices, budget, 1, seed);
  const PolytopeMoments& m = run.pooled;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.covariance);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw SingularCovarianceError("polytope covariance is singular", eig.eigenvalues().minCoeff());
  const Matrix inv_sqrt = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                          eig.eigenvectors().transpose();
  // Whitened volume is vol / sqrt(det Cov); rescale to volume 1.
  const double log_vol = std::log(m.volume) - 0.5 * eig.eigenvalues().array().log().sum();
  const double s = std::exp(-log_vol / n);
  return s * (inv_sqrt * (vertices.colwise() - m.barycenter));
}

SlicingReport slicing_report(const Body& body, int n, std::span<const double> epsilons, Seed seed,
                             const SlicingOptions& options) {
  if (epsilons.empty()) throw Error("analysis", "epsilon grid is empty");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw Error("analysis", "epsilon values must be positive");
  }
  const IsotropicConstant iso = isotropic_constant(body, n, seed, options.isotropic);
  const double dn = static_cast<double>(n);

  SlicingReport report;
  report.body = body.name();
  report.dimension = n;
  report.L_K = iso.L_K;
  report.circumradius = iso.circumradius;
  report.c_reference = options.c_reference;
  report.samples = options.samples;
  report.note =
      "M-position constants are not known explicitly; volumes are reported without asserting that inequality";

  // Squared norms of uniform draws from the volume-1 body, divided by L_K^2.
  std::vector<double> sq(options.samples);
  const Seed slice_seed = derive_seed(seed, {kSliceStream});
  const std::size_t chunks = (options.samples + sample_chunk_size - 1) / sample_chunk_size;
  std::optional<Family> family;
  if (body.kind == Body::Kind::polytope) {
    const auto facets = polytope_facets(body.vertices);
    BoxSampler box{body.vertices, facets, body.vertices.rowwise().minCoeff(),
                   body.vertices.rowwise().maxCoeff()};
    // Barycenter and scale from the moment run inside isotropic_constant.
    const PolytopeRun run = polytope_moments(body.vertices, options.isotropic.budget, options.isotropic.batches,
                                             derive_seed(seed, {kMomentStream}));
    const Vector bary = run.pooled.barycenter;
    const double s = std::pow(run.pooled.volume, -1.0 / dn) / iso.L_K;
    parallel_for(chunks, [&](std::size_t c) {
      Rng rng(slice_seed, {c});
      RejectionMonitor monitor;
      Vector x(n);
      const std::size_t len = std::min(sample_chunk_size, options.samples - c * sample_chunk_size);
      for (std::size_t i = 0; i < len; ++i) {
        bool accepted = false;
        while (!accepted) {
          box.draw(rng, x);
          accepted = box.inside(x);
          monitor.record(accepted);
        }
        sq[c * sample_chunk_size + i] = ((x - bary) * s).squaredNorm();
      }
    });
  } else {
    family = isotropic_family(body.kind, n);
    parallel_for(chunks, [&](std::size_t c) {
      const std::size_t len = std::min(sample_chunk_size, options.samples - c * sample_chunk_size);
      const Matrix pts = sample_chunk(*family, slice_seed, c, len);
      for (std::size_t i = 0; i < len; ++i) sq[c * sample_chunk_size + i] = pts.col(i).squaredNorm();
    });
  }
  std::sort(sq.begin(), sq.end());

  std::vector<double> radii;
  for (double e : epsilons) radii.push_back(std::sqrt(e * dn));
  std::vector<SmallBallEstimate> small;
  if (family) {
    small = small_ball_table(*family, Vector::Zero(n), radii, options.samples,
                             derive_seed(seed, {kSmallBallStream}));
  }

  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    SlicingRow row;
    row.epsilon = epsilons[k];
    row.radius = iso.L_K * radii[k];
    const double r2 = radii[k] * radii[k];
    row.hits = static_cast<std::size_t>(std::upper_bound(sq.begin(), sq.end(), r2) - sq.begin());
    row.volume = static_cast<double>(row.hits) / static_cast<double>(options.samples);
    const Interval ci = row.hits == 0 ? Interval{0.0, zero_hit_upper_bound(options.samples)}
                                      : wilson_interval(row.hits, options.samples);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
    row.contains_body = row.radius >= iso.circumradius;
    if (family) {
      row.small_ball = small[k];
    } else {
      row.small_ball.family = report.body;
      row.small_ball.dimension = n;
      row.small_ball.center = Vector::Zero(n);
      row.small_ball.radius = radii[k];
      row.small_ball.samples = options.samples;
      row.small_ball.hits = row.hits;
      row.small_ball.p_hat = row.volume;
      row.small_ball.ci_low = row.ci_low;
      row.small_ball.ci_high = row.ci_high;
      row.small_ball.seed = slice_seed;
    }
    row.reference = std::pow(options.c_reference * std::sqrt(epsilons[k]), dn);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double square_disc_area(double h, double r) {
  if (h <= 0.0 || r <= 0.0) return 0.0;
  if (r <= h) return std::numbers::pi * r * r;
  if (r * r >= 2.0 * h * h) return 4.0 * h * h;
  const auto primitive = [r](double x) { return 0.5 * (x * std::sqrt(r * r - x * x) + r * r * std::asin(x / r)); };
  const double x0 = std::sqrt(r * r - h * h);
  return 4.0 * (h * x0 + primitive(h) - primitive(x0));
}

}  // namespace locball::analysis

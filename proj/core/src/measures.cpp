#include "locball/measures.hpp"

#include "locball/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace locball {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxScratchDimension = 128;
const double kSqrt3 = std::sqrt(3.0);
const double kLaplaceScale = 1.0 / std::numbers::sqrt2;

using Scratch = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxScratchDimension, 1>;

void require_dimension(int n) {
  if (n < 1) throw Error("measures", "dimension must be positive, got " + std::to_string(n));
}

double log_unit_ball_volume(int n) {
  return 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
}

}  // namespace

std::string_view to_string(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::uniform_cube: return "uniform_cube";
    case FamilyKind::uniform_ball: return "uniform_ball";
    case FamilyKind::uniform_simplex: return "uniform_simplex";
    case FamilyKind::product_laplace: return "product_laplace";
    case FamilyKind::transformed: return "transformed";
    case FamilyKind::symmetrized: return "symmetrized";
  }
  return "unknown";
}

std::string_view to_string(Backend backend) noexcept {
  switch (backend) {
    case Backend::closed_form: return "closed_form";
    case Backend::quadrature: return "quadrature";
    case Backend::sampling: return "sampling";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "closed_form") return Backend::closed_form;
  if (name == "quadrature") return Backend::quadrature;
  if (name == "sampling") return Backend::sampling;
  throw Error("localization", "unknown backend '" + std::string(name) +
                                  "' (expected closed_form, quadrature or sampling)");
}

double CoordinateFactor::log_density(double x) const noexcept {
  if (x < lo || x > hi) return -kInf;
  switch (shape) {
    case Shape::gaussian: return -0.5 * x * x / (scale * scale);
    case Shape::uniform: return 0.0;
    case Shape::laplace: return -std::abs(x) / scale;
  }
  return -kInf;
}

void RejectionMonitor::record(bool accepted) {
  ++window_proposals_;
  ++total_proposals_;
  if (accepted) {
    ++window_accepted_;
    ++total_accepted_;
  }
  if (window_proposals_ == window) {
    const double rate = static_cast<double>(window_accepted_) / static_cast<double>(window);
    if (rate < min_rate) {
      std::ostringstream msg;
      msg << "rejection sampler acceptance rate " << rate << " over a " << window
          << "-proposal window is below " << min_rate;
      throw SamplingError(msg.str(), rate);
    }
    window_proposals_ = 0;
    window_accepted_ = 0;
  }
}

namespace detail {

class FamilyImpl {
 public:
  FamilyImpl(std::string name, int n, FamilyKind kind) : name_(std::move(name)), n_(n), kind_(kind) {}
  virtual ~FamilyImpl() = default;

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return n_; }
  FamilyKind kind() const noexcept { return kind_; }

  virtual double support_radius() const noexcept = 0;
  virtual std::optional<Moments> exact_moments() const = 0;
  virtual bool supports(Backend backend) const noexcept = 0;
  virtual std::optional<Moments> gaussian_parameters() const { return std::nullopt; }
  virtual std::optional<CoordinateFactor> coordinate_factor() const { return std::nullopt; }
  virtual bool has_density() const noexcept { return true; }
  virtual double log_density(const Eigen::Ref<const Vector>& x) const = 0;
  virtual std::optional<double> log_normalizer() const = 0;
  virtual void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor& monitor) const = 0;

 protected:
  Moments isotropic() const { return {Vector::Zero(n_), Matrix::Identity(n_, n_)}; }

 private:
  std::string name_;
  int n_;
  FamilyKind kind_;
};

namespace {

// Base class for i.i.d. coordinate-product laws.
class ProductImpl : public FamilyImpl {
 public:
  ProductImpl(std::string name, int n, FamilyKind kind, CoordinateFactor factor, double log_norm_1d)
      : FamilyImpl(std::move(name), n, kind), factor_(factor), log_norm_1d_(log_norm_1d) {}

  std::optional<Moments> exact_moments() const override { return isotropic(); }
  std::optional<CoordinateFactor> coordinate_factor() const override { return factor_; }
  std::optional<double> log_normalizer() const override { return dimension() * log_norm_1d_; }

  double log_density(const Eigen::Ref<const Vector>& x) const override {
    double sum = 0.0;
    for (int i = 0; i < dimension(); ++i) {
      const double v = factor_.log_density(x[i]);
      if (v == -kInf) return -kInf;
      sum += v;
    }
    return sum;
  }

 protected:
  CoordinateFactor factor_;
  double log_norm_1d_;
};

class GaussianImpl final : public ProductImpl {
 public:
  explicit GaussianImpl(int n)
      : ProductImpl("gaussian", n, FamilyKind::gaussian,
                    {CoordinateFactor::Shape::gaussian, 1.0, -kInf, kInf},
                    -0.5 * std::log(2.0 * std::numbers::pi)) {}

  double support_radius() const noexcept override { return kInf; }
  bool supports(Backend) const noexcept override { return true; }
  std::optional<Moments> gaussian_parameters() const override { return isotropic(); }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor&) const override {
    for (int i = 0; i < dimension(); ++i) out[i] = rng.normal();
  }
};

class CubeImpl final : public ProductImpl {
 public:
  explicit CubeImpl(int n)
      : ProductImpl("uniform_cube", n, FamilyKind::uniform_cube,
                    {CoordinateFactor::Shape::uniform, kSqrt3, -kSqrt3, kSqrt3},
                    -std::log(2.0 * kSqrt3)) {}

  double support_radius() const noexcept override { return std::sqrt(3.0 * dimension()); }
  bool supports(Backend b) const noexcept override { return b != Backend::closed_form; }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor&) const override {
    for (int i = 0; i < dimension(); ++i) out[i] = rng.uniform(-kSqrt3, kSqrt3);
  }
};

class LaplaceImpl final : public ProductImpl {
 public:
  explicit LaplaceImpl(int n)
      : ProductImpl("product_laplace", n, FamilyKind::product_laplace,
                    {CoordinateFactor::Shape::laplace, kLaplaceScale, -kInf, kInf},
                    -std::log(2.0 * kLaplaceScale)) {}

  double support_radius() const noexcept override { return kInf; }
  bool supports(Backend b) const noexcept override { return b != Backend::closed_form; }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor&) const override {
    for (int i = 0; i < dimension(); ++i) {
      const double u = rng.uniform_open();
      out[i] = u < 0.5 ? kLaplaceScale * std::log(2.0 * u) : -kLaplaceScale * std::log(2.0 * (1.0 - u));
    }
  }
};

class BallImpl final : public FamilyImpl {
 public:
  explicit BallImpl(int n)
      : FamilyImpl("uniform_ball", n, FamilyKind::uniform_ball), radius_(std::sqrt(n + 2.0)) {}

  double support_radius() const noexcept override { return radius_; }
  std::optional<Moments> exact_moments() const override { return isotropic(); }
  bool supports(Backend b) const noexcept override { return b == Backend::sampling; }

  double log_density(const Eigen::Ref<const Vector>& x) const override {
    return x.squaredNorm() <= radius_ * radius_ ? 0.0 : -kInf;
  }
  std::optional<double> log_normalizer() const override {
    return -(log_unit_ball_volume(dimension()) + dimension() * std::log(radius_));
  }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor&) const override {
    const int n = dimension();
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int i = 0; i < n; ++i) {
        out[i] = rng.normal();
        norm2 += out[i] * out[i];
      }
    } while (norm2 == 0.0);
    const double r = radius_ * std::pow(rng.uniform_open(), 1.0 / n);
    out *= r / std::sqrt(norm2);
  }

 private:
  double radius_;
};

// Standard simplex {x >= 0, sum x <= 1} mapped by x -> W (x - m) with
// W = Cov^{-1/2}. Cov = c((n+1)I - 11^T), c = 1/((n+1)^2 (n+2)), so W acts as
// alpha on 1-perp and beta along 1.
class SimplexImpl final : public FamilyImpl {
 public:
  explicit SimplexImpl(int n) : FamilyImpl("uniform_simplex", n, FamilyKind::uniform_simplex) {
    const double c = 1.0 / ((n + 1.0) * (n + 1.0) * (n + 2.0));
    alpha_ = 1.0 / std::sqrt(c * (n + 1.0));
    beta_ = 1.0 / std::sqrt(c);
    mean_ = 1.0 / (n + 1.0);
    // log vol(image) = log(1/n!) + log det W
    log_volume_ = -std::lgamma(n + 1.0) + (n - 1) * std::log(alpha_) + std::log(beta_);
    // All vertices are equidistant from the barycenter; use the origin vertex.
    radius_ = beta_ * mean_ * std::sqrt(static_cast<double>(n));
  }

  double support_radius() const noexcept override { return radius_; }
  std::optional<Moments> exact_moments() const override { return isotropic(); }
  bool supports(Backend b) const noexcept override { return b == Backend::sampling; }

  double log_density(const Eigen::Ref<const Vector>& y) const override {
    // Invert: x = W^{-1} y + m, W^{-1} = (1/alpha)(I - P) + (1/beta) P, P = 11^T/n.
    const int n = dimension();
    const double along = y.sum() / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = (y[i] - along) / alpha_ + along / beta_ + mean_;
      if (x < -1e-15) return -kInf;
      total += x;
    }
    return total <= 1.0 + 1e-15 ? 0.0 : -kInf;
  }
  std::optional<double> log_normalizer() const override { return -log_volume_; }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor&) const override {
    const int n = dimension();
    double total = rng.exponential();
    for (int i = 0; i < n; ++i) {
      out[i] = rng.exponential();
      total += out[i];
    }
    double along = 0.0;
    for (int i = 0; i < n; ++i) {
      out[i] = out[i] / total - mean_;
      along += out[i];
    }
    along /= n;
    for (int i = 0; i < n; ++i) out[i] = alpha_ * (out[i] - along) + beta_ * along;
  }

 private:
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double mean_ = 0.0;
  double log_volume_ = 0.0;
  double radius_ = 0.0;
};

class AffineImpl final : public FamilyImpl {
 public:
  AffineImpl(Family inner, Matrix map, Vector shift)
      : FamilyImpl("affine(" + inner.name() + ")", inner.dimension(), FamilyKind::transformed),
        inner_(std::move(inner)),
        map_(std::move(map)),
        shift_(std::move(shift)) {
    const int n = dimension();
    if (map_.rows() != n || map_.cols() != n || shift_.size() != n) {
      throw Error("measures", "affine map must be n x n with an n-vector shift");
    }
    Eigen::PartialPivLU<Matrix> lu(map_);
    const double det = lu.determinant();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
      throw Error("measures", "affine map is singular");
    }
    inverse_ = lu.inverse();
    log_abs_det_ = std::log(std::abs(det));
    operator_norm_ = Eigen::JacobiSVD<Matrix>(map_).singularValues()(0);
  }

  double support_radius() const noexcept override {
    return operator_norm_ * inner_.support_radius() + shift_.norm();
  }

  std::optional<Moments> exact_moments() const override {
    auto inner = inner_.exact_moments();
    if (!inner) return std::nullopt;
    return Moments{map_ * inner->mean + shift_, map_ * inner->covariance * map_.transpose()};
  }

  bool supports(Backend b) const noexcept override {
    if (b == Backend::sampling) return true;
    if (b == Backend::closed_form) return inner_.supports(Backend::closed_form);
    return false;
  }

  std::optional<Moments> gaussian_parameters() const override {
    auto inner = inner_.gaussian_parameters();
    if (!inner) return std::nullopt;
    return Moments{map_ * inner->mean + shift_, map_ * inner->covariance * map_.transpose()};
  }

  bool has_density() const noexcept override { return inner_.has_density(); }

  double log_density(const Eigen::Ref<const Vector>& y) const override {
    const Vector x = inverse_ * (y - shift_);
    return inner_.log_density(x);
  }

  std::optional<double> log_normalizer() const override {
    auto inner = inner_.log_normalizer();
    if (!inner) return std::nullopt;
    return *inner - log_abs_det_;
  }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor& monitor) const override {
    Scratch x(dimension());
    inner_.sample_point(rng, x, monitor);
    out.noalias() = map_ * x;
    out += shift_;
  }

 private:
  Family inner_;
  Matrix map_;
  Vector shift_;
  Matrix inverse_;
  double log_abs_det_ = 0.0;
  double operator_norm_ = 0.0;
};

class RestrictedImpl final : public FamilyImpl {
 public:
  RestrictedImpl(Family inner, double radius)
      : FamilyImpl(make_name(inner, radius), inner.dimension(), FamilyKind::transformed),
        inner_(std::move(inner)),
        radius_(radius) {
    if (!(radius_ > 0.0)) throw Error("measures", "restriction radius must be positive");
  }

  // Conditioning on a ball that contains the support changes nothing.
  bool vacuous() const noexcept { return radius_ >= inner_.support_radius(); }

  double support_radius() const noexcept override { return std::min(radius_, inner_.support_radius()); }

  std::optional<Moments> exact_moments() const override {
    return vacuous() ? inner_.exact_moments() : std::nullopt;
  }
  bool supports(Backend b) const noexcept override {
    return b == Backend::sampling || (vacuous() && inner_.supports(b));
  }
  std::optional<Moments> gaussian_parameters() const override {
    return vacuous() ? inner_.gaussian_parameters() : std::nullopt;
  }
  std::optional<CoordinateFactor> coordinate_factor() const override {
    return vacuous() ? inner_.coordinate_factor() : std::nullopt;
  }
  bool has_density() const noexcept override { return inner_.has_density(); }

  double log_density(const Eigen::Ref<const Vector>& x) const override {
    if (x.squaredNorm() > radius_ * radius_) return -kInf;
    return inner_.log_density(x);
  }
  std::optional<double> log_normalizer() const override {
    return vacuous() ? inner_.log_normalizer() : std::nullopt;
  }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor& monitor) const override {
    const double r2 = radius_ * radius_;
    for (;;) {
      inner_.sample_point(rng, out, monitor);
      const bool accepted = out.squaredNorm() <= r2;
      monitor.record(accepted);
      if (accepted) return;
    }
  }

 private:
  static std::string make_name(const Family& inner, double radius) {
    std::ostringstream s;
    s << "restricted(" << inner.name() << ",r=" << radius << ")";
    return s.str();
  }

  Family inner_;
  double radius_;
};

class SymmetrizedImpl final : public FamilyImpl {
 public:
  explicit SymmetrizedImpl(Family inner)
      : FamilyImpl("symmetrized(" + inner.name() + ")", inner.dimension(), FamilyKind::symmetrized),
        inner_(std::move(inner)) {}

  double support_radius() const noexcept override {
    return std::numbers::sqrt2 * inner_.support_radius();
  }
  std::optional<Moments> exact_moments() const override {
    auto inner = inner_.exact_moments();
    if (!inner) return std::nullopt;
    return Moments{Vector::Zero(dimension()), inner->covariance};
  }
  bool supports(Backend b) const noexcept override { return b == Backend::sampling; }
  bool has_density() const noexcept override { return false; }

  double log_density(const Eigen::Ref<const Vector>&) const override {
    throw Error("measures", "density of " + name() +
                                " is a convolution with no closed form; use the sampling backend");
  }
  std::optional<double> log_normalizer() const override { return std::nullopt; }

  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor& monitor) const override {
    Scratch other(dimension());
    inner_.sample_point(rng, out, monitor);
    inner_.sample_point(rng, other, monitor);
    out = (out - other) / std::numbers::sqrt2;
  }

 private:
  Family inner_;
};

}  // namespace
}  // namespace detail

Family Family::gaussian(int n) {
  require_dimension(n);
  return Family(std::make_shared<detail::GaussianImpl>(n));
}
Family Family::uniform_cube(int n) {
  require_dimension(n);
  return Family(std::make_shared<detail::CubeImpl>(n));
}
Family Family::uniform_ball(int n) {
  require_dimension(n);
  return Family(std::make_shared<detail::BallImpl>(n));
}
Family Family::uniform_simplex(int n) {
  require_dimension(n);
  return Family(std::make_shared<detail::SimplexImpl>(n));
}
Family Family::product_laplace(int n) {
  require_dimension(n);
  return Family(std::make_shared<detail::LaplaceImpl>(n));
}

Family Family::affine(const Family& inner, Matrix map, Vector shift) {
  if (inner.dimension() > kMaxScratchDimension) {
    throw Error("measures", "transformed families support dimension <= " +
                                std::to_string(kMaxScratchDimension));
  }
  return Family(std::make_shared<detail::AffineImpl>(inner, std::move(map), std::move(shift)));
}

Family Family::restricted(const Family& inner, double radius) {
  return Family(std::make_shared<detail::RestrictedImpl>(inner, radius));
}

Family Family::symmetrized(const Family& inner) {
  if (inner.dimension() > kMaxScratchDimension) {
    throw Error("measures", "symmetrized families support dimension <= " +
                                std::to_string(kMaxScratchDimension));
  }
  return Family(std::make_shared<detail::SymmetrizedImpl>(inner));
}

Family Family::from_name(std::string_view name, int n) {
  if (name == "gaussian") return gaussian(n);
  if (name == "uniform_cube" || name == "cube") return uniform_cube(n);
  if (name == "uniform_ball" || name == "ball") return uniform_ball(n);
  if (name == "uniform_simplex" || name == "simplex") return uniform_simplex(n);
  if (name == "product_laplace" || name == "laplace") return product_laplace(n);
  throw Error("measures", "unknown family '" + std::string(name) +
                              "' (expected gaussian, uniform_cube, uniform_ball, uniform_simplex, "
                              "product_laplace)");
}

const std::string& Family::name() const noexcept { return impl_->name(); }
int Family::dimension() const noexcept { return impl_->dimension(); }
FamilyKind Family::kind() const noexcept { return impl_->kind(); }
double Family::support_radius() const noexcept { return impl_->support_radius(); }
bool Family::bounded() const noexcept { return std::isfinite(impl_->support_radius()); }
bool Family::exact_moments_available() const noexcept { return impl_->exact_moments().has_value(); }
std::optional<Moments> Family::exact_moments() const { return impl_->exact_moments(); }
bool Family::supports(Backend backend) const noexcept { return impl_->supports(backend); }
std::optional<Moments> Family::gaussian_parameters() const { return impl_->gaussian_parameters(); }
std::optional<CoordinateFactor> Family::coordinate_factor() const { return impl_->coordinate_factor(); }
bool Family::has_density() const noexcept { return impl_->has_density(); }

double Family::log_density(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dimension()) {
    throw Error("measures", "point has dimension " + std::to_string(x.size()) + ", expected " +
                                std::to_string(dimension()));
  }
  return impl_->log_density(x);
}

std::optional<double> Family::log_normalizer() const { return impl_->log_normalizer(); }

void Family::sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor& monitor) const {
  impl_->sample_point(rng, out, monitor);
}

Matrix sample_chunk(const Family& family, Seed seed, std::size_t chunk, std::size_t count) {
  Matrix points(family.dimension(), static_cast<Eigen::Index>(count));
  Rng rng(seed, {chunk});
  RejectionMonitor monitor;
  Vector x(family.dimension());
  for (std::size_t j = 0; j < count; ++j) {
    family.sample_point(rng, x, monitor);
    points.col(static_cast<Eigen::Index>(j)) = x;
  }
  return points;
}

Matrix sample(const Family& family, std::size_t count, Seed seed) {
  if (count == 0) throw Error("measures", "sample count must be at least 1");
  Matrix points(family.dimension(), static_cast<Eigen::Index>(count));
  const std::size_t chunks = (count + sample_chunk_size - 1) / sample_chunk_size;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * sample_chunk_size;
    const std::size_t len = std::min(sample_chunk_size, count - first);
    points.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(len)) =
        sample_chunk(family, seed, c, len);
  });
  return points;
}

Moments empirical_moments(const Matrix& points) {
  const Eigen::Index count = points.cols();
  if (count < 1) throw Error("measures", "empirical moments need at least one point");
  Vector mean = points.rowwise().mean();
  const Matrix centered = points.colwise() - mean;
  Matrix cov = (centered * centered.transpose()) / static_cast<double>(std::max<Eigen::Index>(1, count - 1));
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), std::move(cov)};
}

}  // namespace locball

#pragma once

#include "locball/rng.hpp"
#include "locball/types.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace locball {

enum class FamilyKind {
  gaussian,
  uniform_cube,
  uniform_ball,
  uniform_simplex,
  product_laplace,
  transformed,
  symmetrized,
};

/// How tilted moments of a family may be computed.
enum class Backend { closed_form, quadrature, sampling };

std::string_view to_string(FamilyKind kind) noexcept;
std::string_view to_string(Backend backend) noexcept;
Backend parse_backend(std::string_view name);

struct Moments {
  Vector mean;
  Matrix covariance;
};

/// The one-dimensional law shared by every coordinate of a product family.
/// Densities are unnormalized; `log_density` is -inf outside [lo, hi].
struct CoordinateFactor {
  enum class Shape { gaussian, uniform, laplace };

  Shape shape;
  double scale;  // standard deviation, half-width, or Laplace scale b
  double lo;
  double hi;

  double log_density(double x) const noexcept;
};

/// Tracks acceptance of a rejection sampler over windows of proposals and
/// throws SamplingError when a full window accepts less than the floor.
class RejectionMonitor {
 public:
  static constexpr std::size_t window = 10'000;
  static constexpr double min_rate = 1e-3;

  void record(bool accepted);

  std::size_t proposals() const noexcept { return total_proposals_; }
  std::size_t accepted() const noexcept { return total_accepted_; }

 private:
  std::size_t window_proposals_ = 0;
  std::size_t window_accepted_ = 0;
  std::size_t total_proposals_ = 0;
  std::size_t total_accepted_ = 0;
};

namespace detail {
class FamilyImpl;
}

/// An immutable log-concave law on R^n with a direct (or rejection) sampler.
/// Copies share the underlying definition; all members are const and the
/// object is safe to share across threads.
class Family {
 public:
  /// Standard Gaussian N(0, I_n).
  static Family gaussian(int dimension);
  /// Uniform on [-sqrt(3), sqrt(3)]^n.
  static Family uniform_cube(int dimension);
  /// Uniform on the centered ball of radius sqrt(n + 2).
  static Family uniform_ball(int dimension);
  /// Uniform on the n-simplex mapped affinely to isotropic position.
  static Family uniform_simplex(int dimension);
  /// Product of unit-variance Laplace laws (scale 1/sqrt(2)).
  static Family product_laplace(int dimension);

  /// Law of map * X + shift for X drawn from `inner`; `map` must be square
  /// and invertible.
  static Family affine(const Family& inner, Matrix map, Vector shift);
  /// Law of X conditioned on |X| <= radius (rejection sampler).
  static Family restricted(const Family& inner, double radius);
  /// Law of (X - X') / sqrt(2) with X' an independent copy.
  static Family symmetrized(const Family& inner);

  /// Resolves a zoo name (gaussian, uniform_cube|cube, uniform_ball|ball,
  /// uniform_simplex|simplex, product_laplace|laplace).
  static Family from_name(std::string_view name, int dimension);

  const std::string& name() const noexcept;
  int dimension() const noexcept;
  FamilyKind kind() const noexcept;

  /// Radius R with support inside B(0, R); +inf for unbounded laws.
  double support_radius() const noexcept;
  bool bounded() const noexcept;

  bool exact_moments_available() const noexcept;
  std::optional<Moments> exact_moments() const;

  /// Whether tilted moments may be computed with the given backend.
  bool supports(Backend backend) const noexcept;

  /// Mean and covariance when the law is Gaussian (closed-form tilting).
  std::optional<Moments> gaussian_parameters() const;
  /// Per-coordinate factor for i.i.d. coordinate-product laws.
  std::optional<CoordinateFactor> coordinate_factor() const;

  bool has_density() const noexcept;
  /// log f(x) up to the family constant; -inf outside the support.
  /// Throws Error when the density has no closed form (symmetrized laws).
  double log_density(const Eigen::Ref<const Vector>& x) const;
  /// Adding this to log_density gives the normalized log-density.
  std::optional<double> log_normalizer() const;

  /// Writes one draw into `out` (size n).
  void sample_point(Rng& rng, Eigen::Ref<Vector> out, RejectionMonitor& monitor) const;

 private:
  explicit Family(std::shared_ptr<const detail::FamilyImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::FamilyImpl> impl_;
};

/// Points per independent sample stream.
inline constexpr std::size_t sample_chunk_size = 1024;

/// Draws points [chunk * sample_chunk_size, ... + count) of the stream keyed
/// by `seed` as matrix columns. Chunk c always uses stream (seed, c).
Matrix sample_chunk(const Family& family, Seed seed, std::size_t chunk, std::size_t count);

/// `count` draws as the columns of an n x count matrix; a deterministic
/// function of (family, count, seed) and a prefix of any longer request.
Matrix sample(const Family& family, std::size_t count, Seed seed);

/// Empirical mean and covariance (1/(N-1) normalization) of columns.
Moments empirical_moments(const Matrix& points);

}  // namespace locball

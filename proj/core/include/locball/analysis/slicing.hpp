#pragma once

#include "locball/analysis/estimators.hpp"
#include "locball/measures.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace locball::analysis {

/// A convex body: one of the exact shapes, or the convex hull of explicit
/// vertices (columns of an n x m matrix).
struct Body {
  enum class Kind { cube, ball, simplex, polytope };

  Kind kind = Kind::cube;
  Matrix vertices;

  static Body cube() { return {Kind::cube, {}}; }
  static Body ball() { return {Kind::ball, {}}; }
  /// The regular simplex.
  static Body simplex() { return {Kind::simplex, {}}; }
  static Body polytope(Matrix vertices) { return {Kind::polytope, std::move(vertices)}; }
  static Body from_name(std::string_view name);

  std::string name() const;
};

/// Vertices of the regular n-simplex centered at the origin.
Matrix regular_simplex_vertices(int dimension);

/// Facets {x : normal·x <= offset} of the hull of the columns, found by
/// brute-force enumeration of vertex n-subsets.
struct Facet {
  Vector normal;
  double offset = 0.0;
};
std::vector<Facet> polytope_facets(const Matrix& vertices);

struct IsotropicConstant {
  double L_K = 0.0;
  /// sup f^{1/n} of the uniform density on the isotropic image of the body.
  double L_f = 0.0;
  double std_error = 0.0;  // zero for exact shapes
  bool exact = false;
  /// Covariance of the body scaled to volume 1 and barycenter 0.
  Matrix covariance;
  /// Volume and circumradius (about the barycenter) after that scaling.
  double volume = 1.0;
  double circumradius = 0.0;
  /// Volume of the body as given.
  double input_volume = 0.0;
};

struct IsotropicOptions {
  std::size_t budget = 1'000'000;  // polytope Monte Carlo points
  std::size_t batches = 32;
  double proportionality_tol = 0.05;
  double agreement_tol = 1e-6;  // L_f vs L_K on exact shapes
};

/// Throws Error when the covariance is not proportional to the identity
/// within the tolerance (see to_isotropic_position).
IsotropicConstant isotropic_constant(const Body& body, int dimension, Seed seed,
                                     const IsotropicOptions& options = {});

/// Maps polytope vertices to volume 1, barycenter 0 and covariance
/// proportional to the identity using Monte-Carlo moments.
Matrix to_isotropic_position(const Matrix& vertices, std::size_t budget, Seed seed);

struct SlicingRow {
  double epsilon = 0.0;
  double radius = 0.0;  // L_K sqrt(eps n)
  double volume = 0.0;  // Vol(K ∩ radius B)
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::size_t hits = 0;
  bool contains_body = false;
  SmallBallEstimate small_ball;  // isotropic uniform law, radius sqrt(eps n)
  double reference = 0.0;        // (C'' sqrt(eps))^n
};

struct SlicingReport {
  std::string body;
  int dimension = 0;
  double L_K = 0.0;
  double circumradius = 0.0;
  double c_reference = 0.0;
  std::size_t samples = 0;
  std::vector<SlicingRow> rows;
  std::string note;
};

struct SlicingOptions {
  std::size_t samples = 1'000'000;
  double c_reference = 2.718281828459045;
  IsotropicOptions isotropic;
};

/// Intersection volumes with centered balls over an epsilon grid, from one
/// shared sample so the volumes are nondecreasing in epsilon.
SlicingReport slicing_report(const Body& body, int dimension, std::span<const double> epsilons,
                             Seed seed, const SlicingOptions& options = {});

/// sup_x f(x)^{1/n} for a family whose density peaks at the origin
/// (the zoo laws); for uniform laws this is vol^{-1/n}.
double density_constant(const Family& family);

/// Area of [-h, h]^2 ∩ {|x| <= r}.
double square_disc_area(double half_side, double r);

}  // namespace locball::analysis

#pragma once

#include <span>
#include <string>
#include <vector>

namespace locball::analysis {

/// Inputs to the closed-form small-ball bounds. The universal constants are
/// parameters, never facts: defaults only generate reference curves.
struct BoundSpec {
  std::vector<double> spectrum;  // eigenvalues of A, descending, positive
  double b = 1.0;                // subgaussian constant
  double epsilon = 0.1;
  double c_universal = 1.0;
  double psi_sq = 1.0;

  void validate() const;
  int dimension() const { return static_cast<int>(spectrum.size()); }
  double trace() const;
};

/// epsilon ^ (c Tr(A) / (b^2 |A|_op |A^{-1}|_op)).
double paouris_bound(const BoundSpec& spec);

/// k = max(1, floor(Tr(A) / (2 lambda_1))); the top-k eigenspace then has
/// lambda_k >= Tr(A) / (2n).
int select_subspace(std::span<const double> spectrum);

/// (4 n lambda_1 eps / Tr(A)) ^ (c Tr(A)^3 / (8 n^2 b^2 lambda_1^2)).
double projected_paouris_bound(const BoundSpec& spec);

/// epsilon ^ (c_b n / (psi_sq log n)); requires n >= 2.
double lee_vempala_bound(int n, double epsilon, double c_b, double psi_sq);

/// C log n, the logarithmic bound on the squared KLS constant.
double psi_sq_log_bound(int n, double C = 1.0);

/// Human-readable warnings for parameter ranges where the bounds are not
/// known to apply (epsilon above 0.5: the admissible threshold is unknown).
std::vector<std::string> bound_warnings(const BoundSpec& spec);

}  // namespace locball::analysis

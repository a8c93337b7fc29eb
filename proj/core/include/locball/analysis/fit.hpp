#pragma once

#include <span>
#include <vector>

namespace locball::analysis {

struct FitRow {
  int n = 0;
  double epsilon = 0.0;
  double p_hat = 0.0;
};

/// Least-squares slope of log p against n log(eps) through the origin, so
/// that p ≈ eps^{c n}.
struct ExponentFit {
  std::vector<FitRow> rows;
  double fitted_c = 0.0;
  /// Root-mean-square misfit of log p, natural-log units.
  double residual = 0.0;
  /// Same fit restricted to each dimension, to expose curvature.
  struct Slope {
    int n;
    double c;
  };
  std::vector<Slope> per_n;
};

ExponentFit exponent_fit(std::span<const FitRow> table);

}  // namespace locball::analysis

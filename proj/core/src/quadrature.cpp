#include "locball/quadrature.hpp"

#include <numbers>

namespace locball {
namespace {

// Newton iteration on P_n from the Chebyshev initial guesses.
GaussLegendreRule build_rule() {
  GaussLegendreRule rule{};
  constexpr std::size_t n = GaussLegendreRule::size;
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      derivative = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * derivative * derivative);
  }
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre_15() {
  static const GaussLegendreRule rule = build_rule();
  return rule;
}

}  // namespace locball

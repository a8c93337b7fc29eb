#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace locball {

/// Nodes and weights of the 15-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  static constexpr std::size_t size = 15;
  std::array<double, size> nodes;
  std::array<double, size> weights;
};

const GaussLegendreRule& gauss_legendre_15();

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> values{};
  double error_estimate = 0.0;
  bool converged = true;
};

namespace detail {

template <std::size_t N, class F>
std::array<double, N> gl_panel(F& f, double a, double b) {
  const auto& rule = gauss_legendre_15();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  std::array<double, N> sum{};
  for (std::size_t i = 0; i < GaussLegendreRule::size; ++i) {
    const std::array<double, N> v = f(mid + half * rule.nodes[i]);
    for (std::size_t k = 0; k < N; ++k) sum[k] += rule.weights[i] * v[k];
  }
  for (auto& s : sum) s *= half;
  return sum;
}

template <std::size_t N, class F>
void gl_adapt(F& f, double a, double b, const std::array<double, N>& whole, double tol, int depth,
              QuadratureResult<N>& out) {
  const double mid = 0.5 * (a + b);
  const auto left = gl_panel<N>(f, a, mid);
  const auto right = gl_panel<N>(f, mid, b);
  double err = 0.0;
  for (std::size_t k = 0; k < N; ++k) err = std::max(err, std::abs(left[k] + right[k] - whole[k]));
  if (err <= tol || depth == 0) {
    if (err > tol) out.converged = false;
    for (std::size_t k = 0; k < N; ++k) out.values[k] += left[k] + right[k];
    out.error_estimate += err;
    return;
  }
  gl_adapt<N>(f, a, mid, left, 0.5 * tol, depth - 1, out);
  gl_adapt<N>(f, mid, b, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Adaptive composite Gauss-Legendre integration of a vector-valued integrand
/// over [a, b]. A panel is accepted when its 15-point value agrees with the
/// sum over its two halves to within its share of `abs_tol`.
template <std::size_t N, class F>
QuadratureResult<N> integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                       int max_depth = 40) {
  QuadratureResult<N> out;
  if (!(b > a)) return out;
  const auto whole = detail::gl_panel<N>(f, a, b);
  detail::gl_adapt<N>(f, a, b, whole, abs_tol, max_depth, out);
  return out;
}

/// Integrates over consecutive intervals [points[0], points[1]], ... splitting
/// the tolerance in proportion to the interval lengths.
template <std::size_t N, class F>
QuadratureResult<N> integrate_piecewise(F&& f, std::span<const double> points, double abs_tol,
                                        int max_depth = 40) {
  QuadratureResult<N> total;
  if (points.size() < 2) return total;
  const double span_length = points.back() - points.front();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (!(b > a)) continue;
    const double share = span_length > 0 ? abs_tol * (b - a) / span_length : abs_tol;
    auto part = integrate_adaptive<N>(f, a, b, share, max_depth);
    for (std::size_t k = 0; k < N; ++k) total.values[k] += part.values[k];
    total.error_estimate += part.error_estimate;
    total.converged = total.converged && part.converged;
  }
  return total;
}

}  // namespace locball

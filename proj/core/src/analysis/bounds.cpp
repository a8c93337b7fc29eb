#include "locball/analysis/bounds.hpp"

#include "locball/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace locball::analysis {

void BoundSpec::validate() const {
  if (spectrum.empty()) throw Error("analysis", "spectrum must be nonempty");
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (!(spectrum[i] > 0.0)) throw Error("analysis", "spectrum entries must be positive");
    if (i > 0 && spectrum[i] > spectrum[i - 1]) throw Error("analysis", "spectrum must be sorted descending");
  }
  if (!(b > 0.0)) throw Error("analysis", "subgaussian constant b must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("analysis", "epsilon must lie in (0, 1)");
  if (!(c_universal > 0.0)) throw Error("analysis", "universal constant must be positive");
  if (!(psi_sq > 0.0)) throw Error("analysis", "psi_sq must be positive");
}

double BoundSpec::trace() const { return std::accumulate(spectrum.begin(), spectrum.end(), 0.0); }

double paouris_bound(const BoundSpec& spec) {
  spec.validate();
  const double top = spec.spectrum.front();
  const double bottom = spec.spectrum.back();
  const double exponent = spec.c_universal * spec.trace() / (spec.b * spec.b * top / bottom);
  return std::pow(spec.epsilon, exponent);
}

int select_subspace(std::span<const double> spectrum) {
  if (spectrum.empty()) throw Error("analysis", "spectrum must be nonempty");
  const double trace = std::accumulate(spectrum.begin(), spectrum.end(), 0.0);
  const int k = static_cast<int>(std::floor(trace / (2.0 * spectrum.front())));
  return std::max(k, 1);
}

double projected_paouris_bound(const BoundSpec& spec) {
  spec.validate();
  const double n = spec.dimension();
  const double trace = spec.trace();
  const double top = spec.spectrum.front();
  const double base = 4.0 * n * top * spec.epsilon / trace;
  const double exponent =
      spec.c_universal * trace * trace * trace / (8.0 * n * n * spec.b * spec.b * top * top);
  return std::pow(base, exponent);
}

double lee_vempala_bound(int n, double epsilon, double c_b, double psi_sq) {
  if (n < 2) throw Error("analysis", "the Lee-Vempala bound needs n >= 2 (log n > 0)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("analysis", "epsilon must lie in (0, 1)");
  if (!(c_b > 0.0) || !(psi_sq > 0.0)) throw Error("analysis", "c_b and psi_sq must be positive");
  return std::pow(epsilon, c_b * n / (psi_sq * std::log(static_cast<double>(n))));
}

double psi_sq_log_bound(int n, double C) {
  if (n < 2) throw Error("analysis", "psi_sq bound needs n >= 2");
  return C * std::log(static_cast<double>(n));
}

std::vector<std::string> bound_warnings(const BoundSpec& spec) {
  std::vector<std::string> out;
  if (spec.epsilon > 0.5) {
    out.push_back("epsilon > 0.5: the admissible range epsilon < c is unknown; bound shown for reference");
  }
  if (!spec.spectrum.empty()) {
    const double base = 4.0 * spec.dimension() * spec.spectrum.front() * spec.epsilon / spec.trace();
    if (base >= 1.0) out.push_back("projected bound base >= 1: the bound is vacuous at this epsilon");
  }
  return out;
}

}  // namespace locball::analysis

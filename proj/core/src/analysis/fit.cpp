#include "locball/analysis/fit.hpp"

#include "locball/types.hpp"

#include <cmath>
#include <map>

namespace locball::analysis {

ExponentFit exponent_fit(std::span<const FitRow> table) {
  if (table.empty()) throw Error("analysis", "exponent fit needs a nonempty table");
  double sxy = 0.0;
  double sxx = 0.0;
  std::map<int, std::pair<double, double>> by_n;
  for (const FitRow& row : table) {
    if (!(row.p_hat > 0.0)) throw Error("analysis", "exponent fit needs p_hat > 0 in every row");
    if (!(row.epsilon > 0.0 && row.epsilon < 1.0)) throw Error("analysis", "epsilon must lie in (0, 1)");
    if (row.n < 1) throw Error("analysis", "dimension must be positive");
    const double x = row.n * std::log(row.epsilon);
    const double y = std::log(row.p_hat);
    sxy += x * y;
    sxx += x * x;
    by_n[row.n].first += x * y;
    by_n[row.n].second += x * x;
  }

  ExponentFit fit;
  fit.rows.assign(table.begin(), table.end());
  fit.fitted_c = sxy / sxx;
  double sq = 0.0;
  for (const FitRow& row : table) {
    const double r = std::log(row.p_hat) - fit.fitted_c * row.n * std::log(row.epsilon);
    sq += r * r;
  }
  fit.residual = std::sqrt(sq / static_cast<double>(table.size()));
  for (const auto& [n, s] : by_n) fit.per_n.push_back({n, s.first / s.second});
  return fit;
}

}  // namespace locball::analysis

#include "catfuse/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace catfuse {

double lasso_lambda_max(const CategoricalDesign& d, const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != d.n())
    throw std::invalid_argument("lasso: response length != n");
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= d.n();
  double best = 0.0;
  for (int j = 0; j < d.p(); ++j) {
    std::vector<double> sums(d.num_levels(j), 0.0);
    for (int i = 0; i < d.n(); ++i) sums[d.level(i, j) - 1] += y[i] - ybar;
    for (double s : sums) best = std::max(best, std::abs(s) / d.n());
  }
  return best;
}

CoefficientFit lasso_baseline_fit(const CategoricalDesign& d, const std::vector<double>& y,
                                  double lambda, const FitConfig& config, SweepTrace* trace) {
  config.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("lasso: lambda must be nonnegative");
  if (static_cast<int>(y.size()) != d.n())
    throw std::invalid_argument("lasso: response length != n");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("lasso: non-finite response");

  const int n = d.n();
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= n;

  // Rows of each level, so coefficient updates touch only their own rows.
  std::vector<std::vector<int>> offsets(d.p());
  std::vector<std::vector<int>> rows(d.p());
  for (int j = 0; j < d.p(); ++j) {
    const int K = d.num_levels(j);
    offsets[j].assign(K + 1, 0);
    for (int i = 0; i < n; ++i) ++offsets[j][d.level(i, j)];
    for (int k = 0; k < K; ++k) offsets[j][k + 1] += offsets[j][k];
    rows[j].assign(n, 0);
    std::vector<int> cursor(offsets[j].begin(), offsets[j].end() - 1);
    for (int i = 0; i < n; ++i) rows[j][cursor[d.level(i, j) - 1]++] = i;
  }

  // Intercept profiled out by centering y and the dummy columns. The centered
  // column for level (j,k) is 1{x_j=k} - n_jk/n; its dense part is carried by
  // the scalar `offset` so residual updates stay sparse.
  std::vector<std::vector<double>> theta(d.p());
  for (int j = 0; j < d.p(); ++j) theta[j].assign(d.num_levels(j), 0.0);

  std::vector<double> r_raw(n);  // y - ybar - sum theta[x]
  for (int i = 0; i < n; ++i) r_raw[i] = y[i] - ybar;
  double offset = 0.0;  // sum_jk theta_jk n_jk / n
  double total_raw = 0.0;
  for (double v : r_raw) total_raw += v;

  bool converged = false;
  int sweeps = 0;

  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    sweeps = sweep;
    double max_change = 0.0;

    for (int j = 0; j < d.p(); ++j) {
      const auto& counts = d.level_counts(j);
      const int K = d.num_levels(j);
      for (int k = 0; k < K; ++k) {
        const double njk = counts[k];
        const double denom = njk / n * (1.0 - njk / n);  // ||centered col||^2 / n
        if (denom <= 0.0) continue;                      // empty or constant column
        const double c = njk / n;
        double level_sum = 0.0;
        for (int idx = offsets[j][k]; idx < offsets[j][k + 1]; ++idx)
          level_sum += r_raw[rows[j][idx]];
        const double inner = (level_sum + njk * offset) - c * (total_raw + n * offset);
        const double old = theta[j][k];
        const double z = inner / n + old * denom;
        const double soft = std::abs(z) <= lambda ? 0.0
                            : z > 0.0              ? z - lambda
                                                   : z + lambda;
        const double next = soft / denom;
        const double delta = next - old;
        if (delta != 0.0) {
          theta[j][k] = next;
          total_raw -= delta * njk;
          offset += delta * c;
          for (int idx = offsets[j][k]; idx < offsets[j][k + 1]; ++idx)
            r_raw[rows[j][idx]] -= delta;
        }
        max_change = std::max(max_change, std::abs(delta) / (1.0 + std::abs(old)));
      }
    }

    if (trace) {
      double sse = 0.0;
      for (double v : r_raw) sse += (v + offset) * (v + offset);
      double l1 = 0.0;
      for (const auto& block : theta)
        for (double v : block) l1 += std::abs(v);
      trace->objective_per_sweep.push_back(sse / (2.0 * n) + lambda * l1);
    }
    if (sweep >= config.min_sweeps && max_change < config.tol) {
      converged = true;
      break;
    }
  }

  // Per-block re-centering leaves every prediction unchanged and puts the
  // intercept at mean(y).
  CoefficientFit fit;
  fit.intercept = ybar;
  fit.converged = converged;
  fit.sweeps_used = sweeps;
  fit.blocks.resize(d.p());
  for (int j = 0; j < d.p(); ++j)
    fit.blocks[j] = center_block(theta[j], d.level_counts(j)).first;
  return fit;
}

}  // namespace catfuse

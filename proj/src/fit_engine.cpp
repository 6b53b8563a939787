#include "catfuse/fit_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "catfuse/block_solver.hpp"

namespace catfuse {

void FitConfig::validate() const {
  if (min_sweeps < 1 || max_sweeps < min_sweeps)
    throw std::invalid_argument("fit config: need max_sweeps >= min_sweeps >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("fit config: tol must be positive");
  if (path_stages < 1) throw std::invalid_argument("fit config: path_stages must be >= 1");
  if (!(path_top >= 1.0)) throw std::invalid_argument("fit config: path_top must be >= 1");
  if (!(path_gamma_top >= 1.0))
    throw std::invalid_argument("fit config: path_gamma_top must be >= 1");
}

std::pair<std::vector<double>, std::vector<double>> partial_residual_means(
    const CategoricalDesign& d, const std::vector<double>& residual, int j) {
  if (j < 0 || j >= d.p())
    throw std::invalid_argument("partial residuals: predictor index out of range");
  if (static_cast<int>(residual.size()) != d.n())
    throw std::invalid_argument("partial residuals: residual length != n");
  const int K = d.num_levels(j);
  std::vector<double> counts = d.level_counts(j);
  std::vector<double> sums(K, 0.0);
  for (int i = 0; i < d.n(); ++i) sums[d.level(i, j) - 1] += residual[i];
  std::vector<double> means(K, 0.0);
  for (int k = 0; k < K; ++k)
    if (counts[k] > 0.0) means[k] = sums[k] / counts[k];
  return {std::move(counts), std::move(means)};
}

namespace {

// MCP chain over the populated levels of one block.
double block_penalty(const std::vector<double>& block, const std::vector<double>& counts,
                     double lambda, double gamma) {
  std::vector<double> populated;
  populated.reserve(block.size());
  for (std::size_t k = 0; k < block.size(); ++k)
    if (counts[k] > 0.0) populated.push_back(block[k]);
  std::sort(populated.begin(), populated.end());
  double pen = 0.0;
  for (std::size_t k = 0; k + 1 < populated.size(); ++k)
    pen += mcp_value(populated[k + 1] - populated[k], lambda, gamma);
  return pen;
}

double total_penalty(const CategoricalDesign& d, const CoefficientFit& fit,
                     const std::vector<double>& lambda_row, const std::vector<double>& gamma_row) {
  double pen = 0.0;
  for (int j = 0; j < d.p(); ++j)
    pen += block_penalty(fit.blocks[j], d.level_counts(j), lambda_row[j], gamma_row[j]);
  return pen;
}

}  // namespace

double objective_value(const CategoricalDesign& d, const std::vector<double>& y,
                       const CoefficientFit& fit, const std::vector<double>& lambda_row,
                       const std::vector<double>& gamma_row) {
  if (static_cast<int>(y.size()) != d.n())
    throw std::invalid_argument("objective: y length != n");
  if (static_cast<int>(lambda_row.size()) != d.p() ||
      static_cast<int>(gamma_row.size()) != d.p())
    throw std::invalid_argument("objective: penalty row length != p");
  const std::vector<double> yhat = predict(d, fit);
  double sse = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const double dev = y[i] - yhat[i];
    sse += dev * dev;
  }
  return sse / (2.0 * d.n()) + total_penalty(d, fit, lambda_row, gamma_row);
}

namespace {

// One blockwise coordinate-descent run at a fixed penalty row, continuing
// from the blocks/residual already in `fit`/`r`. Returns converged.
bool descend(const CategoricalDesign& d, const std::vector<int>& members,
             const std::vector<double>& lambda_row, const std::vector<double>& gamma_row,
             const FitConfig& config, CoefficientFit& fit, std::vector<double>& r,
             SweepTrace* trace, int& sweeps_out);

}  // namespace

CoefficientFit fit_single_response(const CategoricalDesign& d, const std::vector<double>& y,
                                   const ActiveSet& active, const std::vector<double>& lambda_row,
                                   const std::vector<double>& gamma_row, const FitConfig& config,
                                   SweepTrace* trace) {
  config.validate();
  if (static_cast<int>(y.size()) != d.n())
    throw std::invalid_argument("fit: response length != n");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite response value");
  if (static_cast<int>(lambda_row.size()) != d.p() ||
      static_cast<int>(gamma_row.size()) != d.p())
    throw std::invalid_argument("fit: penalty row length != p");
  if (active.p() != d.p()) throw std::invalid_argument("fit: active set sized for wrong p");

  CoefficientFit fit;
  fit.blocks.resize(d.p());
  for (int j = 0; j < d.p(); ++j) fit.blocks[j].assign(d.num_levels(j), 0.0);

  double mu = 0.0;
  for (double v : y) mu += v;
  mu /= d.n();
  fit.intercept = mu;

  std::vector<double> r(d.n());
  for (int i = 0; i < d.n(); ++i) r[i] = y[i] - mu;

  const std::vector<int>& members = active.members();
  bool converged = false;
  int sweeps = 0;

  for (int stage = config.path_stages - 1; stage >= 0; --stage) {
    std::vector<double> stage_lambda = lambda_row;
    std::vector<double> stage_gamma = gamma_row;
    if (stage > 0) {
      const double frac = static_cast<double>(stage) / (config.path_stages - 1);
      const double lmult = std::pow(config.path_top, frac);
      const double gmult = std::pow(config.path_gamma_top, frac);
      for (double& v : stage_lambda) v *= lmult;
      for (double& v : stage_gamma) v *= gmult;
    }
    converged = descend(d, members, stage_lambda, stage_gamma, config, fit, r,
                        stage == 0 ? trace : nullptr, sweeps);
  }

  fit.converged = converged;
  fit.sweeps_used = sweeps;
  return fit;
}

namespace {

bool descend(const CategoricalDesign& d, const std::vector<int>& members,
             const std::vector<double>& lambda_row, const std::vector<double>& gamma_row,
             const FitConfig& config, CoefficientFit& fit, std::vector<double>& r,
             SweepTrace* trace, int& sweeps_out) {
  std::vector<double> sums;
  bool converged = false;

  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    sweeps_out = sweep;
    double max_change = 0.0;

    for (int j : members) {
      const int K = d.num_levels(j);
      const std::vector<double>& counts = d.level_counts(j);
      std::vector<double>& old_block = fit.blocks[j];

      sums.assign(K, 0.0);
      for (int i = 0; i < d.n(); ++i) sums[d.level(i, j) - 1] += r[i];

      BlockProblem bp;
      bp.weights = counts;
      bp.targets.assign(K, 0.0);
      for (int k = 0; k < K; ++k)
        if (counts[k] > 0.0) bp.targets[k] = sums[k] / counts[k] + old_block[k];
      bp.n_total = d.n();
      bp.lambda = lambda_row[j];
      bp.gamma = gamma_row[j];

      BlockSolution sol = solve_fused_block(bp);
      auto [centered, shift] = center_block(sol.coefficients, counts);
      (void)shift;

      // Centering never worsens the subproblem (the targets have zero
      // weighted mean), but keep the incumbent if a boundary case slips.
      const double obj_new = block_objective(bp, centered);
      const double obj_old = block_objective(bp, old_block);
      if (obj_new > obj_old + 1e-12 * (1.0 + std::abs(obj_old))) centered = old_block;

      double delta_inf = 0.0, old_inf = 0.0;
      for (int k = 0; k < K; ++k) {
        delta_inf = std::max(delta_inf, std::abs(centered[k] - old_block[k]));
        old_inf = std::max(old_inf, std::abs(old_block[k]));
      }
      max_change = std::max(max_change, delta_inf / (1.0 + old_inf));

      if (delta_inf > 0.0) {
        for (int i = 0; i < d.n(); ++i) {
          const int k = d.level(i, j) - 1;
          r[i] += old_block[k] - centered[k];
        }
        old_block = std::move(centered);
      }
    }

    if (trace) {
      double sse = 0.0;
      for (double v : r) sse += v * v;
      trace->objective_per_sweep.push_back(sse / (2.0 * d.n()) +
                                           total_penalty(d, fit, lambda_row, gamma_row));
    }
    if (sweep >= config.min_sweeps && max_change < config.tol) {
      converged = true;
      break;
    }
  }
  return converged;
}

}  // namespace

}  // namespace catfuse

#pragma once

#include <utility>
#include <vector>

#include "catfuse/design.hpp"
#include "catfuse/model.hpp"

namespace catfuse {

struct FitConfig {
  int max_sweeps = 200;
  double tol = 1e-8;  // relative coefficient-change tolerance
  int min_sweeps = 2;
  // Penalty continuation: with path_stages > 1 the solve walks a geometric
  // sequence of modified penalties down to the target, warm-starting each
  // stage from the previous one. Stage count 1 is the plain zero-start fit.
  // lambda starts at path_top times its target; gamma starts at
  // path_gamma_top times its target, so early stages sit near the convex
  // total-variation limit and concavity sharpens along the walk. Dense or
  // strongly collinear designs need the staged walk; a cold start at the
  // target penalty can drift along flat directions or stall far from the
  // fused structure.
  int path_stages = 1;
  double path_top = 16.0;        // first-stage multiplier on the target lambda
  double path_gamma_top = 1.0;   // first-stage multiplier on the target gamma

  void validate() const;
};

/// Per-sweep objective values, recorded when a trace sink is supplied.
struct SweepTrace {
  std::vector<double> objective_per_sweep;
};

/// Level counts and level means of a residual vector under predictor j.
/// Levels with zero count get mean 0.
std::pair<std::vector<double>, std::vector<double>> partial_residual_means(
    const CategoricalDesign& d, const std::vector<double>& residual, int j);

/// Penalized objective at a given fit:
///   (1/2n) ||y - mu - sum_j theta_j[x_j]||^2 + sum_j mcp chain of block j,
/// order statistics taken within each block over its populated levels.
double objective_value(const CategoricalDesign& d, const std::vector<double>& y,
                       const CoefficientFit& fit, const std::vector<double>& lambda_row,
                       const std::vector<double>& gamma_row);

/// One penalized single-response fit: intercept fixed at mean(y), then
/// blockwise coordinate descent over the active predictors, each block update
/// being the exact fused-block solution of its partial-residual subproblem
/// followed by re-centering. Blocks outside `active` stay exactly zero.
/// A fit that exhausts max_sweeps is returned with converged = false.
/// With path_stages > 1 only the final (target-penalty) stage is traced and
/// reflected in converged/sweeps_used.
CoefficientFit fit_single_response(const CategoricalDesign& d, const std::vector<double>& y,
                                   const ActiveSet& active, const std::vector<double>& lambda_row,
                                   const std::vector<double>& gamma_row, const FitConfig& config,
                                   SweepTrace* trace = nullptr);

}  // namespace catfuse

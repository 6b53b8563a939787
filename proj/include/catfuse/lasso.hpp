#pragma once

#include <vector>

#include "catfuse/design.hpp"
#include "catfuse/fit_engine.hpp"
#include "catfuse/model.hpp"

namespace catfuse {

/// l1-penalized least squares over the full dummy encoding (one indicator per
/// level), intercept unpenalized, cyclic soft-threshold coordinate descent.
/// The returned blocks are re-centered to the count-weighted sum-to-zero
/// constraint, which leaves predictions unchanged and puts the intercept at
/// mean(y).
CoefficientFit lasso_baseline_fit(const CategoricalDesign& d, const std::vector<double>& y,
                                  double lambda, const FitConfig& config,
                                  SweepTrace* trace = nullptr);

/// Smallest lambda nulling every dummy coefficient:
/// max_{j,k} |<1{x_j=k}, y - mean(y)>| / n.
double lasso_lambda_max(const CategoricalDesign& d, const std::vector<double>& y);

}  // namespace catfuse

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "catfuse/design.hpp"
#include "catfuse/fit_engine.hpp"
#include "catfuse/model.hpp"

namespace catfuse {

/// Result of the multi-response procedure: one fit per response plus the full
/// active-set history, one entry per single-response step.
struct MultiFit {
  std::vector<CoefficientFit> fits;
  std::vector<std::pair<int, ActiveSet>> active_history;  // (response, set)
  bool converged = false;
  int rounds_completed = 0;
  int steps_taken = 0;
};

/// Predictors whose block holds any exactly nonzero coefficient. The block
/// solver emits exact zeros for fully fused centered blocks, so no tolerance
/// is involved.
ActiveSet update_active_set(const CoefficientFit& fit);

/// Active-set propagation across responses. Starting from the universal set,
/// response l is fit with the previous response's active set as a zero
/// constraint and then publishes its own nonzero set; the last set wraps to
/// the next round. Rounds repeat until one full round leaves every set
/// unchanged, or max_rounds is hit (converged = false in that case).
MultiFit iterative_q_step(const CategoricalDesign& d, const ResponseMatrix& Y,
                          const PenaltyParams& params, const FitConfig& config,
                          int max_rounds);

/// Exactly one round of the propagation, no convergence check.
MultiFit one_pass_q_step(const CategoricalDesign& d, const ResponseMatrix& Y,
                         const PenaltyParams& params, const FitConfig& config);

/// Least squares with a known fusion structure: levels collapse to their
/// groups, the centered normal equations are solved, and the group values
/// expand back to level coefficients. Groups with zero total count are pinned
/// to 0. Throws if the collapsed, centered design is rank deficient.
CoefficientFit oracle_least_squares(const CategoricalDesign& d, const std::vector<double>& y,
                                    const PatternRow& pattern);

/// Largest squared row norm of the linear map y -> oracle coefficients for
/// the given fusion structure (used by the recovery diagnostics).
double oracle_map_max_row_norm_sq(const CategoricalDesign& d, const PatternRow& pattern);

/// K-fold selection of the penalty level. Grid entries are multipliers m; the
/// fitted penalty for predictor j is m * sqrt(log K_j / n). Per response, the
/// multiplier minimizing the mean held-out squared error of one-pass fits is
/// kept. Fold assignment is a seeded deterministic permutation. Held-out rows
/// with levels unseen in training predict through coefficient 0. When
/// propagate is false the fits use the universal active set for every
/// response (independent single-response tuning).
PenaltyParams cross_validate(const CategoricalDesign& d, const ResponseMatrix& Y,
                             const std::vector<double>& lambda_grid, double gamma_default,
                             int folds, std::uint64_t seed, bool propagate = true,
                             const FitConfig& config = FitConfig{},
                             std::vector<std::vector<double>>* cv_errors = nullptr);

/// Default multiplier grid: 20 points, logarithmic over [0.01, 2].
std::vector<double> default_lambda_grid();

/// Default gamma.
inline constexpr double kDefaultGamma = 8.0;

/// lambda matrix scale factor for predictor j: sqrt(log K_j / n).
double lambda_scale(const CategoricalDesign& d, int j);

}  // namespace catfuse

#pragma once

#include <vector>

namespace catfuse {

/// One-predictor subproblem: weighted squared loss over level coefficients
/// plus the MCP penalty on adjacent order-statistic differences,
///
///   (1/2n) sum_k w_k (t_k - theta_k)^2  +  sum_k rho(theta_(k+1) - theta_(k)),
///
/// where the order statistics run over the positive-weight levels only.
struct BlockProblem {
  std::vector<double> weights;  // level counts n_{jk}, >= 0
  std::vector<double> targets;  // level means of the partial residuals
  double n_total = 1.0;         // the n in 1/(2n)
  double lambda = 0.0;
  double gamma = 1.0;

  int num_levels() const { return static_cast<int>(weights.size()); }
  void validate() const;
};

struct BlockSolution {
  std::vector<double> coefficients;
  double objective = 0.0;
  // Fused-group id per level, ordered by coefficient value; -1 marks
  // zero-weight levels, which sit outside the penalty chain.
  std::vector<int> cluster_assignment;
};

/// MCP value rho(x) = integral_0^x lambda (1 - t/(gamma lambda))_+ dt.
/// Equals lambda x - x^2/(2 gamma) for x <= gamma lambda and saturates at
/// gamma lambda^2 / 2 beyond. Throws on x < 0 or gamma <= 0.
double mcp_value(double x, double lambda, double gamma);

/// Exact objective of a candidate coefficient vector for this problem.
double block_objective(const BlockProblem& prob, const std::vector<double>& coefficients);

/// Global minimizer of the block objective. Zero-weight levels receive
/// coefficient 0 and are excluded from the penalty chain; levels with equal
/// targets always fuse; the coefficients preserve the target order.
BlockSolution solve_fused_block(const BlockProblem& prob);

/// Independent verification oracle: enumerates every contiguous partition of
/// the levels sorted by target and solves each partition's cluster values by
/// dense grid search refined with exact coordinate descent. Guarded to K <= 8.
BlockSolution brute_force_block_oracle(const BlockProblem& prob);

namespace detail {

// Large-block strategy (segmentation DP plus local merge/split search),
// exposed so tests can cross-check it against the exact small-block path.
BlockSolution solve_fused_block_dp(const BlockProblem& prob);

// Exact small-block path (stationarity-pattern enumeration).
BlockSolution solve_fused_block_exact(const BlockProblem& prob);

// Largest block size handled by the exact path inside solve_fused_block.
inline constexpr int kExactPathMaxLevels = 9;

}  // namespace detail

}  // namespace catfuse

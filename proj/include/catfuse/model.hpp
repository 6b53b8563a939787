#pragma once

#include <utility>
#include <vector>

#include "catfuse/design.hpp"

namespace catfuse {

/// Coefficients of one response: an intercept plus one ragged block per
/// predictor (block j has K_j entries). Blocks are kept under the
/// count-weighted sum-to-zero constraint; predictors outside the fit's
/// active set hold exact zeros.
struct CoefficientFit {
  double intercept = 0.0;
  std::vector<std::vector<double>> blocks;
  int response_index = 0;
  bool converged = true;
  int sweeps_used = 0;
};

/// Per-response, per-predictor MCP parameters.
struct PenaltyParams {
  // lambda[l][j] >= 0, gamma[l][j] > 0.
  std::vector<std::vector<double>> lambda;
  std::vector<std::vector<double>> gamma;

  int q() const { return static_cast<int>(lambda.size()); }
  int p() const { return lambda.empty() ? 0 : static_cast<int>(lambda[0].size()); }

  static PenaltyParams constant(int q, int p, double lam, double gam);
  void validate() const;
};

/// Sorted set of 0-based predictor indices.
class ActiveSet {
 public:
  ActiveSet() = default;
  ActiveSet(std::vector<int> members, int p);

  static ActiveSet universal(int p);
  static ActiveSet empty(int p);

  bool contains(int j) const;
  int size() const { return static_cast<int>(members_.size()); }
  const std::vector<int>& members() const { return members_; }
  int p() const { return p_; }

  bool operator==(const ActiveSet& o) const { return members_ == o.members_; }
  bool operator!=(const ActiveSet& o) const { return !(*this == o); }

  // True when o contains every member of this set.
  bool subset_of(const ActiveSet& o) const;

 private:
  std::vector<int> members_;
  int p_ = 0;
};

/// Partition of one block's levels (0-based) into groups that share a
/// coefficient value.
struct BlockPartition {
  std::vector<std::vector<int>> groups;
};

/// One response's fusion structure: a partition per predictor.
using PatternRow = std::vector<BlockPartition>;

/// Per-response fusion structure for all q responses.
struct FusionPattern {
  std::vector<PatternRow> rows;
};

// Groups the levels of each block by exactly equal coefficient value.
PatternRow pattern_from_fit(const CoefficientFit& fit);

// Checks that every block's groups cover 0..K_j-1 exactly once.
void validate_pattern_row(const PatternRow& row, const CategoricalDesign& d);

/// yhat_i = intercept + sum_j block_j[level(i,j)].
std::vector<double> predict(const CategoricalDesign& d, const CoefficientFit& fit);

/// Centers a block to the count-weighted sum-to-zero constraint.
/// Returns (centered, shift) with centered_k = raw_k - shift where counts_k > 0
/// and exactly 0 where counts_k == 0; shift is the count-weighted mean over the
/// populated levels. Throws if all counts are zero or any count is negative.
std::pair<std::vector<double>, double> center_block(const std::vector<double>& raw,
                                                    const std::vector<double>& counts);

}  // namespace catfuse

#pragma once

#include <vector>

#include "catfuse/design.hpp"
#include "catfuse/model.hpp"

namespace catfuse {

/// Separation and complexity quantities for a known (true) coefficient table.
/// They describe how recoverable the fused structure is at the given design
/// and penalty parameters.
struct TheoryDiagnostics {
  // s[l][j]: number of distinct coefficient values in block (l, j).
  std::vector<std::vector<int>> s;
  // delta[l][j]: minimal gap between unequal values; +inf when s == 1.
  std::vector<std::vector<double>> delta;
  // Per predictor: extremes over responses and levels of the total count of
  // the fused group containing each level.
  std::vector<double> n_j_min;
  std::vector<double> n_j_max;
  // Per predictor: smallest single-level count (reported for completeness;
  // the feasibility checks below do not use it).
  std::vector<double> m_j_min;
  // Largest eta in (0, 1] with eta/s_max_j <= n_j_min/n and
  // n_j_max/n <= 1/(eta s_min_j) for every j; 0 when infeasible.
  double eta_feasible = 0.0;
  // gamma_star[j] = max(gamma_max_j, eta * s_max_j).
  std::vector<double> gamma_star;
  // separation_ok[l][j]: delta >= (4 + 3 sqrt(2)/eta) * sqrt(gamma_max_j *
  // gamma_star_j) * lambda_max_j (trivially true for constant blocks).
  std::vector<std::vector<bool>> separation_ok;
  // Smallest inverse max-row-norm of the y -> oracle-coefficients maps over
  // responses; 0 when a map is not computable (rank-deficient collapse).
  double c_min = 0.0;
  // Recovery-probability exponent factors per predictor, without the noise
  // scale: E_j = (n_j_min ^ c_min) * eta * gamma_star_j * s * lambda^2 / 8,
  // using response 1's s and lambda (literal) and the min over responses
  // (conservative). The recovery probability at noise sd sigma is
  // 1 - 4 exp(-E_j / sigma^2 + log(q K_j)).
  std::vector<double> prob_exponent_literal;
  std::vector<double> prob_exponent_conservative;
  std::vector<double> log_term;  // log(q K_j)

  int q() const { return static_cast<int>(s.size()); }
  int p() const { return s.empty() ? 0 : static_cast<int>(s[0].size()); }
};

/// Computes the diagnostics for a true coefficient table (one fit per
/// response; blocks compared by exact equality).
TheoryDiagnostics compute_diagnostics(const CategoricalDesign& d,
                                      const std::vector<CoefficientFit>& truth,
                                      const PenaltyParams& params);

}  // namespace catfuse

#include "catfuse/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "catfuse/multi_response.hpp"

namespace catfuse {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TheoryDiagnostics compute_diagnostics(const CategoricalDesign& d,
                                      const std::vector<CoefficientFit>& truth,
                                      const PenaltyParams& params) {
  const int q = static_cast<int>(truth.size());
  if (q == 0) throw std::invalid_argument("diagnostics: empty truth table");
  params.validate();
  if (params.q() != q || params.p() != d.p())
    throw std::invalid_argument("diagnostics: penalty shape mismatch");
  for (const auto& fit : truth) {
    if (static_cast<int>(fit.blocks.size()) != d.p())
      throw std::invalid_argument("diagnostics: truth block count != p");
    for (int j = 0; j < d.p(); ++j)
      if (static_cast<int>(fit.blocks[j].size()) != d.num_levels(j))
        throw std::invalid_argument("diagnostics: truth block length != K_j");
  }

  TheoryDiagnostics out;
  out.s.assign(q, std::vector<int>(d.p(), 0));
  out.delta.assign(q, std::vector<double>(d.p(), kInf));
  out.n_j_min.assign(d.p(), kInf);
  out.n_j_max.assign(d.p(), 0.0);
  out.m_j_min.assign(d.p(), kInf);
  out.gamma_star.assign(d.p(), 0.0);
  out.separation_ok.assign(q, std::vector<bool>(d.p(), false));
  out.prob_exponent_literal.assign(d.p(), 0.0);
  out.prob_exponent_conservative.assign(d.p(), 0.0);
  out.log_term.assign(d.p(), 0.0);

  for (int j = 0; j < d.p(); ++j) {
    const auto& counts = d.level_counts(j);
    for (double c : counts) out.m_j_min[j] = std::min(out.m_j_min[j], c);

    for (int l = 0; l < q; ++l) {
      const auto& block = truth[l].blocks[j];
      std::vector<double> distinct(block);
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      out.s[l][j] = static_cast<int>(distinct.size());
      if (distinct.size() > 1) {
        double gap = kInf;
        for (std::size_t k = 0; k + 1 < distinct.size(); ++k)
          gap = std::min(gap, distinct[k + 1] - distinct[k]);
        out.delta[l][j] = gap;
      }
      // Per level: total count of the value group containing it.
      for (int k = 0; k < d.num_levels(j); ++k) {
        double group_count = 0.0;
        for (int k2 = 0; k2 < d.num_levels(j); ++k2)
          if (block[k2] == block[k]) group_count += counts[k2];
        out.n_j_min[j] = std::min(out.n_j_min[j], group_count);
        out.n_j_max[j] = std::max(out.n_j_max[j], group_count);
      }
    }
  }

  // Largest eta in (0, 1] fitting the sandwich for every predictor.
  double eta = 1.0;
  for (int j = 0; j < d.p(); ++j) {
    int s_min = out.s[0][j], s_max = out.s[0][j];
    for (int l = 1; l < q; ++l) {
      s_min = std::min(s_min, out.s[l][j]);
      s_max = std::max(s_max, out.s[l][j]);
    }
    eta = std::min(eta, s_max * out.n_j_min[j] / d.n());
    eta = std::min(eta, d.n() / (out.n_j_max[j] * s_min));
  }
  out.eta_feasible = eta > 0.0 ? std::min(eta, 1.0) : 0.0;

  // c_min over the per-response coefficient maps.
  double c_min = kInf;
  bool c_ok = true;
  for (int l = 0; l < q && c_ok; ++l) {
    try {
      const double max_norm = oracle_map_max_row_norm_sq(d, pattern_from_fit(truth[l]));
      if (max_norm > 0.0) c_min = std::min(c_min, 1.0 / max_norm);
    } catch (const std::exception&) {
      c_ok = false;
    }
  }
  out.c_min = c_ok ? (std::isinf(c_min) ? 0.0 : c_min) : 0.0;

  for (int j = 0; j < d.p(); ++j) {
    double lambda_max = 0.0, gamma_max = 0.0;
    int s_max = 0;
    for (int l = 0; l < q; ++l) {
      lambda_max = std::max(lambda_max, params.lambda[l][j]);
      gamma_max = std::max(gamma_max, params.gamma[l][j]);
      s_max = std::max(s_max, out.s[l][j]);
    }
    out.gamma_star[j] = std::max(gamma_max, out.eta_feasible * s_max);

    const double eta_f = out.eta_feasible;
    for (int l = 0; l < q; ++l) {
      if (out.s[l][j] == 1) {
        out.separation_ok[l][j] = true;
        continue;
      }
      if (eta_f <= 0.0) continue;
      const double threshold = (4.0 + 3.0 * std::sqrt(2.0) / eta_f) *
                               std::sqrt(gamma_max * out.gamma_star[j]) * lambda_max;
      out.separation_ok[l][j] = out.delta[l][j] >= threshold;
    }

    const double nc = std::min(out.n_j_min[j], out.c_min);
    out.prob_exponent_literal[j] = nc * eta_f * out.gamma_star[j] * out.s[0][j] *
                                   params.lambda[0][j] * params.lambda[0][j] / 8.0;
    double worst = kInf;
    for (int l = 0; l < q; ++l)
      worst = std::min(worst, out.s[l][j] * params.lambda[l][j] * params.lambda[l][j]);
    out.prob_exponent_conservative[j] = nc * eta_f * out.gamma_star[j] * worst / 8.0;
    out.log_term[j] = std::log(static_cast<double>(q) * d.num_levels(j));
  }
  return out;
}

}  // namespace catfuse

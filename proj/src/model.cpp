#include "catfuse/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace catfuse {

PenaltyParams PenaltyParams::constant(int q, int p, double lam, double gam) {
  PenaltyParams out;
  out.lambda.assign(q, std::vector<double>(p, lam));
  out.gamma.assign(q, std::vector<double>(p, gam));
  out.validate();
  return out;
}

void PenaltyParams::validate() const {
  if (lambda.empty() || lambda.size() != gamma.size())
    throw std::invalid_argument("penalty: lambda/gamma shape mismatch");
  for (std::size_t l = 0; l < lambda.size(); ++l) {
    if (lambda[l].size() != gamma[l].size() || lambda[l].size() != lambda[0].size())
      throw std::invalid_argument("penalty: ragged parameter matrix");
    for (std::size_t j = 0; j < lambda[l].size(); ++j) {
      if (!(lambda[l][j] >= 0.0) || !std::isfinite(lambda[l][j]))
        throw std::invalid_argument("penalty: lambda must be finite and nonnegative");
      if (!(gamma[l][j] > 0.0))
        throw std::invalid_argument("penalty: gamma must be positive");
    }
  }
}

ActiveSet::ActiveSet(std::vector<int> members, int p) : members_(std::move(members)), p_(p) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  for (int j : members_)
    if (j < 0 || j >= p_) throw std::invalid_argument("active set: index out of range");
}

ActiveSet ActiveSet::universal(int p) {
  std::vector<int> m(p);
  for (int j = 0; j < p; ++j) m[j] = j;
  return ActiveSet(std::move(m), p);
}

ActiveSet ActiveSet::empty(int p) { return ActiveSet({}, p); }

bool ActiveSet::contains(int j) const {
  return std::binary_search(members_.begin(), members_.end(), j);
}

bool ActiveSet::subset_of(const ActiveSet& o) const {
  return std::includes(o.members_.begin(), o.members_.end(), members_.begin(), members_.end());
}

PatternRow pattern_from_fit(const CoefficientFit& fit) {
  PatternRow row;
  row.reserve(fit.blocks.size());
  for (const auto& block : fit.blocks) {
    std::map<double, std::vector<int>> by_value;
    for (int k = 0; k < static_cast<int>(block.size()); ++k)
      by_value[block[k]].push_back(k);
    BlockPartition part;
    for (auto& [value, levels] : by_value) part.groups.push_back(std::move(levels));
    row.push_back(std::move(part));
  }
  return row;
}

void validate_pattern_row(const PatternRow& row, const CategoricalDesign& d) {
  if (static_cast<int>(row.size()) != d.p())
    throw std::invalid_argument("pattern: needs one partition per predictor");
  for (int j = 0; j < d.p(); ++j) {
    std::vector<int> seen(d.num_levels(j), 0);
    for (const auto& g : row[j].groups) {
      if (g.empty()) throw std::invalid_argument("pattern: empty group");
      for (int k : g) {
        if (k < 0 || k >= d.num_levels(j))
          throw std::invalid_argument("pattern: level out of range");
        if (seen[k]++) throw std::invalid_argument("pattern: level covered twice");
      }
    }
    for (int k = 0; k < d.num_levels(j); ++k)
      if (!seen[k]) throw std::invalid_argument("pattern: level not covered");
  }
}

std::vector<double> predict(const CategoricalDesign& d, const CoefficientFit& fit) {
  if (static_cast<int>(fit.blocks.size()) != d.p())
    throw std::invalid_argument("predict: block count != p");
  for (int j = 0; j < d.p(); ++j)
    if (static_cast<int>(fit.blocks[j].size()) != d.num_levels(j))
      throw std::invalid_argument("predict: block length != K_j");

  std::vector<double> yhat(d.n(), fit.intercept);
  for (int i = 0; i < d.n(); ++i)
    for (int j = 0; j < d.p(); ++j) yhat[i] += fit.blocks[j][d.level(i, j) - 1];
  return yhat;
}

std::pair<std::vector<double>, double> center_block(const std::vector<double>& raw,
                                                    const std::vector<double>& counts) {
  if (raw.size() != counts.size())
    throw std::invalid_argument("center: raw/counts length mismatch");
  double total = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0.0) throw std::invalid_argument("center: negative count");
    total += counts[k];
    weighted += counts[k] * raw[k];
  }
  if (total <= 0.0) throw std::invalid_argument("center: all counts zero");
  const double shift = weighted / total;
  std::vector<double> centered(raw.size(), 0.0);
  for (std::size_t k = 0; k < raw.size(); ++k)
    if (counts[k] > 0.0) centered[k] = raw[k] - shift;
  return {std::move(centered), shift};
}

}  // namespace catfuse

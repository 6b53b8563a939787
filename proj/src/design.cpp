#include "catfuse/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace catfuse {

CategoricalDesign::CategoricalDesign(int n, int p, std::vector<int> levels,
                                     std::vector<int> num_levels,
                                     std::vector<std::vector<std::string>> labels)
    : n_(n), p_(p), levels_(std::move(levels)), num_levels_(std::move(num_levels)),
      labels_(std::move(labels)) {
  if (n_ <= 0 || p_ <= 0) throw std::invalid_argument("design: n and p must be positive");
  if (levels_.size() != static_cast<std::size_t>(n_) * p_)
    throw std::invalid_argument("design: level matrix has wrong size");
  if (num_levels_.size() != static_cast<std::size_t>(p_) ||
      labels_.size() != static_cast<std::size_t>(p_))
    throw std::invalid_argument("design: per-predictor metadata has wrong size");

  counts_.assign(p_, {});
  for (int j = 0; j < p_; ++j) {
    if (num_levels_[j] < 1) throw std::invalid_argument("design: K_j must be >= 1");
    if (labels_[j].size() != static_cast<std::size_t>(num_levels_[j]))
      throw std::invalid_argument("design: label list length != K_j");
    std::set<std::string> uniq(labels_[j].begin(), labels_[j].end());
    if (uniq.size() != labels_[j].size())
      throw std::invalid_argument("design: duplicate level labels");
    counts_[j].assign(num_levels_[j], 0.0);
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < p_; ++j) {
      int k = level(i, j);
      if (k < 1 || k > num_levels_[j])
        throw std::invalid_argument("design: level index out of range");
      counts_[j][k - 1] += 1.0;
    }
  }
}

CategoricalDesign CategoricalDesign::subset_rows(const std::vector<int>& rows) const {
  if (rows.empty()) throw std::invalid_argument("design: empty row subset");
  std::vector<int> sub;
  sub.reserve(rows.size() * static_cast<std::size_t>(p_));
  for (int i : rows) {
    if (i < 0 || i >= n_) throw std::invalid_argument("design: subset row out of range");
    for (int j = 0; j < p_; ++j) sub.push_back(level(i, j));
  }
  return CategoricalDesign(static_cast<int>(rows.size()), p_, std::move(sub), num_levels_,
                           labels_);
}

CategoricalDesign ingest_design(const std::vector<std::vector<std::string>>& columns) {
  if (columns.empty()) throw std::invalid_argument("ingest: no columns");
  const std::size_t n = columns[0].size();
  if (n == 0) throw std::invalid_argument("ingest: empty column");
  const int p = static_cast<int>(columns.size());

  std::vector<std::vector<std::string>> labels(p);
  std::vector<int> num_levels(p);
  std::vector<std::map<std::string, int>> code(p);
  for (int j = 0; j < p; ++j) {
    if (columns[j].size() != n) throw std::invalid_argument("ingest: ragged columns");
    std::set<std::string> uniq(columns[j].begin(), columns[j].end());
    labels[j].assign(uniq.begin(), uniq.end());  // lexicographic
    num_levels[j] = static_cast<int>(labels[j].size());
    for (int k = 0; k < num_levels[j]; ++k) code[j][labels[j][k]] = k + 1;
  }

  std::vector<int> levels(n * static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) levels[i * p + j] = code[j].at(columns[j][i]);

  return CategoricalDesign(static_cast<int>(n), p, std::move(levels), std::move(num_levels),
                           std::move(labels));
}

ResponseMatrix::ResponseMatrix(std::vector<std::vector<double>> columns)
    : cols_(std::move(columns)) {
  if (cols_.empty()) throw std::invalid_argument("responses: q must be >= 1");
  n_ = static_cast<int>(cols_[0].size());
  if (n_ == 0) throw std::invalid_argument("responses: empty column");
  for (const auto& c : cols_) {
    if (static_cast<int>(c.size()) != n_)
      throw std::invalid_argument("responses: ragged columns");
    for (double v : c)
      if (!std::isfinite(v)) throw std::invalid_argument("responses: non-finite value");
  }
}

}  // namespace catfuse

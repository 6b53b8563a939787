#pragma once

#include <string>
#include <vector>

namespace catfuse {

/// Design matrix of categorical predictors stored as 1-based level indices.
///
/// Construction validates the index range, per-level counts, and label
/// uniqueness; instances are immutable afterwards and safe to share across
/// threads.
class CategoricalDesign {
 public:
  // levels is row-major n x p with entries in 1..num_levels[j]; labels[j]
  // must hold num_levels[j] distinct strings.
  CategoricalDesign(int n, int p, std::vector<int> levels,
                    std::vector<int> num_levels,
                    std::vector<std::vector<std::string>> labels);

  int n() const { return n_; }
  int p() const { return p_; }

  // 1-based level of observation i under predictor j (both 0-based args).
  int level(int i, int j) const { return levels_[static_cast<std::size_t>(i) * p_ + j]; }

  int num_levels(int j) const { return num_levels_[j]; }

  // n_{jk} for k = 1..K_j (0-based vector position k-1).
  const std::vector<double>& level_counts(int j) const { return counts_[j]; }

  const std::vector<std::string>& level_labels(int j) const { return labels_[j]; }

  // Original label of observation i's level under predictor j.
  const std::string& decode(int i, int j) const {
    return labels_[j][static_cast<std::size_t>(level(i, j)) - 1];
  }

  // Row subset with the same label space and K_j; counts are recomputed, so
  // levels absent from the subset get count zero.
  CategoricalDesign subset_rows(const std::vector<int>& rows) const;

 private:
  int n_ = 0;
  int p_ = 0;
  std::vector<int> levels_;
  std::vector<int> num_levels_;
  std::vector<std::vector<double>> counts_;
  std::vector<std::vector<std::string>> labels_;
};

/// Builds a design from raw string columns. Levels are mapped to 1..K_j by
/// lexicographic order of the distinct labels, which makes the encoding
/// independent of row order.
CategoricalDesign ingest_design(const std::vector<std::vector<std::string>>& columns);

/// Multi-response observations; column l holds response y_l.
class ResponseMatrix {
 public:
  explicit ResponseMatrix(std::vector<std::vector<double>> columns);

  int n() const { return n_; }
  int q() const { return static_cast<int>(cols_.size()); }
  const std::vector<double>& col(int l) const { return cols_[l]; }

 private:
  int n_ = 0;
  std::vector<std::vector<double>> cols_;
};

}  // namespace catfuse

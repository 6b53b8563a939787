#include "catfuse/multi_response.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "catfuse/rng.hpp"

namespace catfuse {

ActiveSet update_active_set(const CoefficientFit& fit) {
  std::vector<int> members;
  const int p = static_cast<int>(fit.blocks.size());
  for (int j = 0; j < p; ++j)
    for (double v : fit.blocks[j])
      if (v != 0.0) {
        members.push_back(j);
        break;
      }
  return ActiveSet(std::move(members), p);
}

namespace {

void check_multi_shapes(const CategoricalDesign& d, const ResponseMatrix& Y,
                        const PenaltyParams& params) {
  params.validate();
  if (Y.n() != d.n()) throw std::invalid_argument("multi: response rows != design rows");
  if (params.q() != Y.q()) throw std::invalid_argument("multi: penalty rows != q");
  if (params.p() != d.p()) throw std::invalid_argument("multi: penalty cols != p");
}

// One round of the propagation; returns true when no step changed the set.
bool run_round(const CategoricalDesign& d, const ResponseMatrix& Y, const PenaltyParams& params,
               const FitConfig& config, ActiveSet& current, MultiFit& out) {
  bool stable = true;
  for (int l = 0; l < Y.q(); ++l) {
    CoefficientFit fit =
        fit_single_response(d, Y.col(l), current, params.lambda[l], params.gamma[l], config);
    fit.response_index = l;
    ActiveSet next = update_active_set(fit);
    out.active_history.emplace_back(l, next);
    ++out.steps_taken;
    if (next != current) stable = false;
    current = std::move(next);
    out.fits[l] = std::move(fit);
  }
  return stable;
}

}  // namespace

MultiFit iterative_q_step(const CategoricalDesign& d, const ResponseMatrix& Y,
                          const PenaltyParams& params, const FitConfig& config, int max_rounds) {
  check_multi_shapes(d, Y, params);
  if (max_rounds < 1) throw std::invalid_argument("multi: max_rounds must be >= 1");
  MultiFit out;
  out.fits.resize(Y.q());
  ActiveSet current = ActiveSet::universal(d.p());
  for (int round = 1; round <= max_rounds; ++round) {
    const bool stable = run_round(d, Y, params, config, current, out);
    out.rounds_completed = round;
    if (stable) {
      out.converged = true;
      break;
    }
  }
  return out;
}

MultiFit one_pass_q_step(const CategoricalDesign& d, const ResponseMatrix& Y,
                         const PenaltyParams& params, const FitConfig& config) {
  check_multi_shapes(d, Y, params);
  MultiFit out;
  out.fits.resize(Y.q());
  ActiveSet current = ActiveSet::universal(d.p());
  run_round(d, Y, params, config, current, out);
  out.rounds_completed = 1;
  out.converged = false;  // not evaluated
  return out;
}

namespace {

// Reduced parametrization of the constrained, collapsed design. Per block,
// groups with positive total count get one value; the count-weighted
// sum-to-zero constraint eliminates the largest-count group.
struct ReducedDesign {
  struct Block {
    std::vector<double> group_count;   // per group of the pattern
    std::vector<int> free_cols;        // column id per group, -1 if not free
    int elim_group = -1;               // -1 when the block has no free columns
  };
  std::vector<Block> blocks;
  int num_cols = 0;
};

ReducedDesign build_reduced(const CategoricalDesign& d, const PatternRow& pattern) {
  ReducedDesign rd;
  rd.blocks.resize(d.p());
  for (int j = 0; j < d.p(); ++j) {
    const auto& groups = pattern[j].groups;
    auto& blk = rd.blocks[j];
    blk.group_count.assign(groups.size(), 0.0);
    blk.free_cols.assign(groups.size(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (int k : groups[g]) blk.group_count[g] += d.level_counts(j)[k];

    int elim = -1;
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (blk.group_count[g] > 0.0 && (elim < 0 || blk.group_count[g] > blk.group_count[elim]))
        elim = static_cast<int>(g);
    int populated = 0;
    for (double c : blk.group_count) populated += c > 0.0 ? 1 : 0;
    if (populated <= 1) continue;  // constraint pins the block to zero
    blk.elim_group = elim;
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (static_cast<int>(g) != elim && blk.group_count[g] > 0.0)
        blk.free_cols[g] = rd.num_cols++;
  }
  return rd;
}

Eigen::MatrixXd assemble_columns(const CategoricalDesign& d, const PatternRow& pattern,
                                 const ReducedDesign& rd) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d.n(), rd.num_cols);
  for (int j = 0; j < d.p(); ++j) {
    const auto& blk = rd.blocks[j];
    if (blk.elim_group < 0) continue;
    std::vector<int> group_of_level(d.num_levels(j), -1);
    for (std::size_t g = 0; g < pattern[j].groups.size(); ++g)
      for (int k : pattern[j].groups[g]) group_of_level[k] = static_cast<int>(g);
    const double elim_count = blk.group_count[blk.elim_group];
    for (int i = 0; i < d.n(); ++i) {
      const int g = group_of_level[d.level(i, j) - 1];
      if (g == blk.elim_group) {
        for (std::size_t h = 0; h < blk.free_cols.size(); ++h)
          if (blk.free_cols[h] >= 0)
            B(i, blk.free_cols[h]) -= blk.group_count[h] / elim_count;
      } else if (blk.free_cols[g] >= 0) {
        B(i, blk.free_cols[g]) += 1.0;
      }
    }
  }
  return B;
}

// Expands free-column values to per-level coefficients.
std::vector<std::vector<double>> expand_solution(const CategoricalDesign& d,
                                                 const PatternRow& pattern,
                                                 const ReducedDesign& rd,
                                                 const Eigen::VectorXd& beta) {
  std::vector<std::vector<double>> blocks(d.p());
  for (int j = 0; j < d.p(); ++j) {
    blocks[j].assign(d.num_levels(j), 0.0);
    const auto& blk = rd.blocks[j];
    if (blk.elim_group < 0) continue;
    std::vector<double> group_value(pattern[j].groups.size(), 0.0);
    double weighted = 0.0;
    for (std::size_t g = 0; g < group_value.size(); ++g)
      if (blk.free_cols[g] >= 0) {
        group_value[g] = beta[blk.free_cols[g]];
        weighted += blk.group_count[g] * group_value[g];
      }
    group_value[blk.elim_group] = -weighted / blk.group_count[blk.elim_group];
    for (std::size_t g = 0; g < group_value.size(); ++g)
      for (int k : pattern[j].groups[g]) blocks[j][k] = group_value[g];
  }
  return blocks;
}

}  // namespace

CoefficientFit oracle_least_squares(const CategoricalDesign& d, const std::vector<double>& y,
                                    const PatternRow& pattern) {
  if (static_cast<int>(y.size()) != d.n())
    throw std::invalid_argument("oracle ls: response length != n");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("oracle ls: non-finite response");
  validate_pattern_row(pattern, d);

  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= d.n();

  CoefficientFit fit;
  fit.intercept = ybar;

  const ReducedDesign rd = build_reduced(d, pattern);
  if (rd.num_cols == 0) {
    fit.blocks.resize(d.p());
    for (int j = 0; j < d.p(); ++j) fit.blocks[j].assign(d.num_levels(j), 0.0);
    return fit;
  }

  const Eigen::MatrixXd B = assemble_columns(d, pattern, rd);
  Eigen::VectorXd rhs(d.n());
  for (int i = 0; i < d.n(); ++i) rhs[i] = y[i] - ybar;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  qr.setThreshold(1e-10);
  if (qr.rank() < rd.num_cols)
    throw std::runtime_error("oracle ls: rank-deficient collapsed design");
  const Eigen::VectorXd beta = qr.solve(rhs);

  fit.blocks = expand_solution(d, pattern, rd, beta);
  return fit;
}

double oracle_map_max_row_norm_sq(const CategoricalDesign& d, const PatternRow& pattern) {
  validate_pattern_row(pattern, d);
  const ReducedDesign rd = build_reduced(d, pattern);
  if (rd.num_cols == 0) return 0.0;

  const Eigen::MatrixXd B = assemble_columns(d, pattern, rd);
  const Eigen::MatrixXd M = B.transpose() * B;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("oracle ls map: singular normal equations");
  const Eigen::MatrixXd Minv =
      ldlt.solve(Eigen::MatrixXd::Identity(rd.num_cols, rd.num_cols));
  if (!Minv.allFinite())
    throw std::runtime_error("oracle ls map: singular normal equations");

  // Row r of the coefficient map is the expansion row E_r; the squared row
  // norm of E M^{-1} B^T is E_r M^{-1} E_r^T because B^T B = M and the
  // columns of B sum to zero.
  double max_q = 0.0;
  for (int j = 0; j < d.p(); ++j) {
    const auto& blk = rd.blocks[j];
    if (blk.elim_group < 0) continue;
    const std::size_t ngroups = pattern[j].groups.size();
    for (std::size_t g = 0; g < ngroups; ++g) {
      if (blk.group_count[g] <= 0.0) continue;  // pinned level, zero map row
      std::vector<std::pair<int, double>> row;
      if (static_cast<int>(g) == blk.elim_group) {
        for (std::size_t h = 0; h < ngroups; ++h)
          if (blk.free_cols[h] >= 0)
            row.emplace_back(blk.free_cols[h],
                             -blk.group_count[h] / blk.group_count[blk.elim_group]);
      } else if (blk.free_cols[g] >= 0) {
        row.emplace_back(blk.free_cols[g], 1.0);
      }
      double quad = 0.0;
      for (const auto& [ca, va] : row)
        for (const auto& [cb, vb] : row) quad += va * vb * Minv(ca, cb);
      max_q = std::max(max_q, quad);
    }
  }
  return max_q;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(20);
  const double lo = 0.01, hi = 2.0;
  for (int i = 0; i < 20; ++i) grid[i] = lo * std::pow(hi / lo, i / 19.0);
  return grid;
}

double lambda_scale(const CategoricalDesign& d, int j) {
  return std::sqrt(std::log(static_cast<double>(d.num_levels(j))) / d.n());
}

namespace {

PenaltyParams scaled_params(const CategoricalDesign& d, int q, double multiplier,
                            double gamma_default) {
  PenaltyParams pp;
  pp.lambda.assign(q, std::vector<double>(d.p(), 0.0));
  pp.gamma.assign(q, std::vector<double>(d.p(), gamma_default));
  for (int l = 0; l < q; ++l)
    for (int j = 0; j < d.p(); ++j) pp.lambda[l][j] = multiplier * lambda_scale(d, j);
  return pp;
}

}  // namespace

PenaltyParams cross_validate(const CategoricalDesign& d, const ResponseMatrix& Y,
                             const std::vector<double>& lambda_grid, double gamma_default,
                             int folds, std::uint64_t seed, bool propagate,
                             const FitConfig& config,
                             std::vector<std::vector<double>>* cv_errors) {
  if (lambda_grid.empty()) throw std::invalid_argument("cv: empty lambda grid");
  if (folds < 2) throw std::invalid_argument("cv: folds must be >= 2");
  if (folds > d.n()) throw std::invalid_argument("cv: fold with zero rows");
  if (Y.n() != d.n()) throw std::invalid_argument("cv: response rows != design rows");
  if (!(gamma_default > 0.0)) throw std::invalid_argument("cv: gamma must be positive");
  const int q = Y.q();

  std::vector<int> perm(d.n());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  // Strided assignment keeps fold sizes within one row of each other.
  std::vector<std::vector<int>> fold_rows(folds);
  for (int i = 0; i < d.n(); ++i) fold_rows[i % folds].push_back(perm[i]);

  struct Fold {
    CategoricalDesign train;
    std::vector<std::vector<double>> train_y;  // per response
    std::vector<int> test_rows;
  };
  std::vector<Fold> prepared;
  prepared.reserve(folds);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows;
    for (int g = 0; g < folds; ++g)
      if (g != f) train_rows.insert(train_rows.end(), fold_rows[g].begin(), fold_rows[g].end());
    std::sort(train_rows.begin(), train_rows.end());
    Fold fold{d.subset_rows(train_rows), {}, fold_rows[f]};
    fold.train_y.assign(q, {});
    for (int l = 0; l < q; ++l) {
      fold.train_y[l].reserve(train_rows.size());
      for (int i : train_rows) fold.train_y[l].push_back(Y.col(l)[i]);
    }
    prepared.push_back(std::move(fold));
  }

  std::vector<std::vector<double>> err(q, std::vector<double>(lambda_grid.size(), 0.0));
  for (std::size_t gidx = 0; gidx < lambda_grid.size(); ++gidx) {
    // The per-predictor scale uses the full-sample n so the multiplier means
    // the same thing during selection and in the final fit.
    for (const Fold& fold : prepared) {
      PenaltyParams pp = scaled_params(d, q, lambda_grid[gidx], gamma_default);
      std::vector<CoefficientFit> fits;
      if (propagate) {
        ResponseMatrix train_Y{fold.train_y};
        fits = one_pass_q_step(fold.train, train_Y, pp, config).fits;
      } else {
        const ActiveSet universal = ActiveSet::universal(d.p());
        fits.reserve(q);
        for (int l = 0; l < q; ++l)
          fits.push_back(fit_single_response(fold.train, fold.train_y[l], universal,
                                             pp.lambda[l], pp.gamma[l], config));
      }
      for (int l = 0; l < q; ++l) {
        for (int i : fold.test_rows) {
          double pred = fits[l].intercept;
          for (int j = 0; j < d.p(); ++j) pred += fits[l].blocks[j][d.level(i, j) - 1];
          const double dev = Y.col(l)[i] - pred;
          err[l][gidx] += dev * dev;
        }
      }
    }
    for (int l = 0; l < q; ++l) err[l][gidx] /= d.n();
  }

  PenaltyParams out;
  out.lambda.assign(q, std::vector<double>(d.p(), 0.0));
  out.gamma.assign(q, std::vector<double>(d.p(), gamma_default));
  for (int l = 0; l < q; ++l) {
    std::size_t best = 0;
    for (std::size_t gidx = 1; gidx < lambda_grid.size(); ++gidx)
      if (err[l][gidx] < err[l][best]) best = gidx;
    for (int j = 0; j < d.p(); ++j)
      out.lambda[l][j] = lambda_grid[best] * lambda_scale(d, j);
  }
  if (cv_errors) *cv_errors = std::move(err);
  return out;
}

}  // namespace catfuse

#include "catfuse/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "catfuse/lasso.hpp"
#include "catfuse/rng.hpp"

namespace catfuse {

void ScenarioSpec::validate() const {
  if (n <= 0 || p <= 0 || K <= 0)
    throw std::invalid_argument("scenario: n, p, K must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("scenario: sigma must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("scenario: rho must be in [0,1)");
  if (scenario_id != 1 && scenario_id != 2)
    throw std::invalid_argument("scenario: unsupported scenario id");
  if (replications < 1) throw std::invalid_argument("scenario: replications must be >= 1");
}

std::string to_string(StudyMode mode) {
  switch (mode) {
    case StudyMode::iterative: return "iterative";
    case StudyMode::one_pass: return "one-pass";
    case StudyMode::univariate_baseline: return "univariate";
    case StudyMode::lasso_baseline: return "lasso";
  }
  return "unknown";
}

StudyMode study_mode_from_string(const std::string& s) {
  if (s == "iterative") return StudyMode::iterative;
  if (s == "one-pass" || s == "one_pass") return StudyMode::one_pass;
  if (s == "univariate" || s == "univariate_baseline") return StudyMode::univariate_baseline;
  if (s == "lasso" || s == "lasso_baseline") return StudyMode::lasso_baseline;
  throw std::invalid_argument("unknown study mode: " + s);
}

std::vector<double> gen_copula_uniforms(int n, int p, double rho, std::uint64_t seed) {
  if (n <= 0 || p <= 0) throw std::invalid_argument("copula: n, p must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("copula: rho must be in [0,1)");
  Rng rng(seed);
  const double shared = std::sqrt(rho);
  const double own = std::sqrt(1.0 - rho);
  std::vector<double> u(static_cast<std::size_t>(n) * p);
  for (int i = 0; i < n; ++i) {
    const double z0 = rng.normal();
    for (int j = 0; j < p; ++j) {
      const double w = shared * z0 + own * rng.normal();
      u[static_cast<std::size_t>(i) * p + j] = norm_cdf(w);
    }
  }
  return u;
}

CategoricalDesign gen_correlated_categorical(int n, int p, int K, double rho,
                                             std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("copula design: K must be >= 2");
  const std::vector<double> u = gen_copula_uniforms(n, p, rho, seed);
  std::vector<int> levels(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    levels[i] = std::min(K, static_cast<int>(std::floor(K * u[i])) + 1);

  int width = 1;
  for (int v = K; v >= 10; v /= 10) ++width;
  std::vector<std::string> labels(K);
  for (int k = 1; k <= K; ++k) {
    std::string s = std::to_string(k);
    labels[k - 1] = std::string(width - s.size(), '0') + s;
  }
  return CategoricalDesign(n, p, std::move(levels), std::vector<int>(p, K),
                           std::vector<std::vector<std::string>>(p, labels));
}

namespace {

std::vector<double> block_of(int K, std::initializer_list<std::pair<int, double>> runs) {
  std::vector<double> out;
  out.reserve(K);
  for (const auto& [len, value] : runs)
    for (int i = 0; i < len; ++i) out.push_back(value);
  if (static_cast<int>(out.size()) != K)
    throw std::logic_error("scenario: run lengths do not sum to K");
  return out;
}

}  // namespace

std::vector<CoefficientFit> scenario_coefficients(int scenario_id, int p, int K) {
  if (K != 24) throw std::invalid_argument("scenario: coefficient tables require K = 24");
  std::vector<CoefficientFit> truth(2);
  for (int l = 0; l < 2; ++l) {
    truth[l].intercept = 0.0;
    truth[l].response_index = l;
    truth[l].blocks.assign(p, std::vector<double>(K, 0.0));
  }
  if (scenario_id == 1) {
    if (p < 3) throw std::invalid_argument("scenario 1: needs p >= 3");
    for (int j = 0; j < 3; ++j) {
      truth[0].blocks[j] = block_of(K, {{10, -3.0}, {4, 0.0}, {10, 3.0}});
      truth[1].blocks[j] = block_of(K, {{8, -3.0}, {8, 0.0}, {8, 3.0}});
    }
  } else if (scenario_id == 2) {
    if (p < 25) throw std::invalid_argument("scenario 2: needs p >= 25");
    for (int j = 0; j < 25; ++j)
      truth[0].blocks[j] = block_of(K, {{16, -2.0}, {8, 3.0}});
    for (int j = 0; j < 10; ++j)
      truth[1].blocks[j] = block_of(K, {{12, -3.0}, {12, 3.0}});
  } else {
    throw std::invalid_argument("scenario: unsupported scenario id");
  }
  return truth;
}

double l2_error(const CoefficientFit& estimate, const CoefficientFit& truth_centered) {
  if (estimate.blocks.size() != truth_centered.blocks.size())
    throw std::invalid_argument("l2: block count mismatch");
  double ss = 0.0;
  for (std::size_t j = 0; j < estimate.blocks.size(); ++j) {
    if (estimate.blocks[j].size() != truth_centered.blocks[j].size())
      throw std::invalid_argument("l2: block length mismatch");
    for (std::size_t k = 0; k < estimate.blocks[j].size(); ++k) {
      const double dev = estimate.blocks[j][k] - truth_centered.blocks[j][k];
      ss += dev * dev;
    }
  }
  return std::sqrt(ss);
}

double prediction_mse(const CategoricalDesign& d_test, const std::vector<double>& y_clean,
                      const CoefficientFit& fit) {
  if (static_cast<int>(y_clean.size()) != d_test.n())
    throw std::invalid_argument("mse: signal length != n");
  const std::vector<double> yhat = predict(d_test, fit);
  double ss = 0.0;
  for (int i = 0; i < d_test.n(); ++i) {
    const double dev = yhat[i] - y_clean[i];
    ss += dev * dev;
  }
  return ss / d_test.n();
}

namespace {

// Truth centered to the count-weighted constraint of a concrete design;
// the absorbed shifts move into the intercept.
CoefficientFit center_truth(const CoefficientFit& truth, const CategoricalDesign& d) {
  CoefficientFit out = truth;
  for (int j = 0; j < d.p(); ++j) {
    auto [centered, shift] = center_block(truth.blocks[j], d.level_counts(j));
    out.blocks[j] = std::move(centered);
    out.intercept += shift;
  }
  return out;
}

// CV fits run looser than the final fit; selection curves are flat at the
// final-fit precision.
FitConfig cv_config(const FitConfig& base) {
  FitConfig cfg = base;
  cfg.tol = std::max(cfg.tol, 1e-6);
  cfg.max_sweeps = std::min(cfg.max_sweeps, 60);
  cfg.min_sweeps = std::min(cfg.min_sweeps, cfg.max_sweeps);
  return cfg;
}

PenaltyParams params_for_multiplier(const CategoricalDesign& d, int q, double m, double gamma) {
  PenaltyParams pp;
  pp.lambda.assign(q, std::vector<double>(d.p(), 0.0));
  pp.gamma.assign(q, std::vector<double>(d.p(), gamma));
  for (int l = 0; l < q; ++l)
    for (int j = 0; j < d.p(); ++j) pp.lambda[l][j] = m * lambda_scale(d, j);
  return pp;
}

// Per-response lasso tuning over a glmnet-style grid, same fold scheme as
// cross_validate.
std::pair<double, double> lasso_cv_select(const CategoricalDesign& d,
                                          const std::vector<double>& y, int folds,
                                          std::uint64_t seed, const FitConfig& config) {
  const double lmax = lasso_lambda_max(d, y);
  if (lmax <= 0.0) return {0.0, 0.0};
  const int grid_size = 15;
  std::vector<double> grid(grid_size);
  for (int i = 0; i < grid_size; ++i)
    grid[i] = lmax * std::pow(1e-3, i / (grid_size - 1.0));

  std::vector<int> perm(d.n());
  for (int i = 0; i < d.n(); ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<std::vector<int>> fold_rows(folds);
  for (int i = 0; i < d.n(); ++i) fold_rows[i % folds].push_back(perm[i]);

  std::vector<double> err(grid_size, 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows;
    for (int g = 0; g < folds; ++g)
      if (g != f) train_rows.insert(train_rows.end(), fold_rows[g].begin(), fold_rows[g].end());
    std::sort(train_rows.begin(), train_rows.end());
    const CategoricalDesign train = d.subset_rows(train_rows);
    std::vector<double> train_y;
    train_y.reserve(train_rows.size());
    for (int i : train_rows) train_y.push_back(y[i]);

    for (int gi = 0; gi < grid_size; ++gi) {
      const CoefficientFit fit = lasso_baseline_fit(train, train_y, grid[gi], config);
      for (int i : fold_rows[f]) {
        double pred = fit.intercept;
        for (int j = 0; j < d.p(); ++j) pred += fit.blocks[j][d.level(i, j) - 1];
        const double dev = y[i] - pred;
        err[gi] += dev * dev;
      }
    }
  }
  int best = 0;
  for (int gi = 1; gi < grid_size; ++gi)
    if (err[gi] < err[best]) best = gi;
  return {grid[best], err[best] / d.n()};
}

}  // namespace

MetricsReport run_study(const ScenarioSpec& spec, StudyMode mode, const StudyOptions& options) {
  spec.validate();
  const std::vector<double> grid =
      options.lambda_grid.empty() ? default_lambda_grid() : options.lambda_grid;
  const std::vector<CoefficientFit> truth_master =
      scenario_coefficients(spec.scenario_id, spec.p, spec.K);
  const int q = static_cast<int>(truth_master.size());

  MetricsReport report;
  report.spec = spec;
  report.mode = mode;
  report.rows.assign(spec.replications, ReplicationRow{});

  auto run_one = [&](int rep) {
    const std::uint64_t seed_r = spec.base_seed ^ static_cast<std::uint64_t>(rep);
    const CategoricalDesign design =
        gen_correlated_categorical(spec.n, spec.p, spec.K, spec.rho, derive_seed(seed_r, 1));

    std::vector<std::vector<double>> ycols(q);
    for (int l = 0; l < q; ++l) {
      ycols[l] = predict(design, truth_master[l]);
      Rng noise(derive_seed(seed_r, 2 + static_cast<std::uint64_t>(l)));
      for (double& v : ycols[l]) v += spec.sigma * noise.normal();
    }
    const ResponseMatrix Y(ycols);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CoefficientFit> fits(q);
    std::vector<double> chosen(q, options.fixed_lambda);

    if (mode == StudyMode::lasso_baseline) {
      for (int l = 0; l < q; ++l) {
        double lam = options.fixed_lambda;
        if (lam < 0.0)
          lam = lasso_cv_select(design, Y.col(l), options.cv_folds,
                                derive_seed(seed_r, 10 + static_cast<std::uint64_t>(l)),
                                cv_config(options.fit))
                    .first;
        chosen[l] = lam;
        fits[l] = lasso_baseline_fit(design, Y.col(l), lam, options.fit);
        fits[l].response_index = l;
      }
    } else {
      PenaltyParams pp;
      if (options.fixed_lambda >= 0.0) {
        pp = params_for_multiplier(design, q, options.fixed_lambda, options.gamma);
      } else {
        std::vector<std::vector<double>> cv_err;
        pp = cross_validate(design, Y, grid, options.gamma, options.cv_folds,
                            derive_seed(seed_r, 10), mode != StudyMode::univariate_baseline,
                            cv_config(options.fit), &cv_err);
        for (int l = 0; l < q; ++l) {
          std::size_t best = 0;
          for (std::size_t gi = 1; gi < grid.size(); ++gi)
            if (cv_err[l][gi] < cv_err[l][best]) best = gi;
          chosen[l] = grid[best];
        }
      }
      if (mode == StudyMode::iterative) {
        fits = iterative_q_step(design, Y, pp, options.fit, options.max_rounds).fits;
      } else if (mode == StudyMode::one_pass) {
        fits = one_pass_q_step(design, Y, pp, options.fit).fits;
      } else {
        const ActiveSet universal = ActiveSet::universal(design.p());
        for (int l = 0; l < q; ++l) {
          fits[l] = fit_single_response(design, Y.col(l), universal, pp.lambda[l],
                                        pp.gamma[l], options.fit);
          fits[l].response_index = l;
        }
      }
    }
    const auto t1 = std::chrono::steady_clock::now();

    const CategoricalDesign test = gen_correlated_categorical(spec.n, spec.p, spec.K, spec.rho,
                                                              derive_seed(seed_r, 50));
    ReplicationRow row;
    row.replication = rep;
    row.lambda_chosen = chosen;
    row.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
    for (int l = 0; l < q; ++l) {
      const CoefficientFit centered = center_truth(truth_master[l], design);
      row.l2_error.push_back(l2_error(fits[l], centered));
      const std::vector<double> y_clean = predict(test, truth_master[l]);
      row.mse.push_back(prediction_mse(test, y_clean, fits[l]));
    }
    report.rows[rep] = std::move(row);
  };

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, spec.replications));
  if (threads == 1) {
    for (int rep = 0; rep < spec.replications; ++rep) run_one(rep);
  } else {
    std::atomic<int> counter{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int rep = counter.fetch_add(1); rep < spec.replications;
             rep = counter.fetch_add(1))
          run_one(rep);
      });
    for (auto& th : pool) th.join();
  }

  report.mean_l2.assign(q, 0.0);
  report.sd_l2.assign(q, 0.0);
  report.mean_mse.assign(q, 0.0);
  report.sd_mse.assign(q, 0.0);
  const int R = spec.replications;
  for (int l = 0; l < q; ++l) {
    for (const auto& row : report.rows) {
      report.mean_l2[l] += row.l2_error[l];
      report.mean_mse[l] += row.mse[l];
    }
    report.mean_l2[l] /= R;
    report.mean_mse[l] /= R;
    if (R > 1) {
      double s2_l2 = 0.0, s2_mse = 0.0;
      for (const auto& row : report.rows) {
        s2_l2 += (row.l2_error[l] - report.mean_l2[l]) * (row.l2_error[l] - report.mean_l2[l]);
        s2_mse += (row.mse[l] - report.mean_mse[l]) * (row.mse[l] - report.mean_mse[l]);
      }
      report.sd_l2[l] = std::sqrt(s2_l2 / (R - 1));
      report.sd_mse[l] = std::sqrt(s2_mse / (R - 1));
    }
  }
  return report;
}

}  // namespace catfuse

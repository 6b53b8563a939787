#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "catfuse/block_solver.hpp"
#include "catfuse/fit_engine.hpp"
#include "catfuse/rng.hpp"
#include "test_util.hpp"

using namespace catfuse;

namespace {

std::vector<double> random_response(Rng& rng, const CategoricalDesign& d, double sd = 1.0) {
  std::vector<double> y(d.n());
  for (auto& v : y) v = sd * rng.normal();
  return y;
}

double weighted_sum(const std::vector<double>& block, const std::vector<double>& counts) {
  double s = 0.0;
  for (std::size_t k = 0; k < block.size(); ++k) s += counts[k] * block[k];
  return s;
}

}  // namespace

TEST_CASE("partial residual means") {
  const CategoricalDesign d(4, 1, {1, 1, 2, 2}, {2}, {{"a", "b"}});
  {
    const auto [counts, means] = partial_residual_means(d, {0.0, 0.0, 0.0, 0.0}, 0);
    CHECK(means == std::vector<double>{0.0, 0.0});
  }
  {
    const auto [counts, means] = partial_residual_means(d, {1.0, 3.0, -2.0, -2.0}, 0);
    CHECK(counts == std::vector<double>{2.0, 2.0});
    CHECK(means == std::vector<double>{2.0, -2.0});
  }
  const CategoricalDesign sparse(2, 1, {1, 3}, {3}, {{"a", "b", "c"}});
  const auto [counts, means] = partial_residual_means(sparse, {5.0, 7.0}, 0);
  CHECK(counts[1] == 0.0);
  CHECK(means[1] == 0.0);  // empty level contributes a zero mean
}

TEST_CASE("huge lambda returns the null fit") {
  Rng rng(101);
  const auto d = testutil::random_design(rng, 60, 4, 5);
  const auto y = random_response(rng, d, 2.0);
  const std::vector<double> lambda(4, 1e4), gamma(4, 2.0);
  const auto fit =
      fit_single_response(d, y, ActiveSet::universal(4), lambda, gamma, FitConfig{});
  double mu = 0.0;
  for (double v : y) mu += v;
  mu /= d.n();
  CHECK(fit.intercept == doctest::Approx(mu).epsilon(1e-14));
  for (const auto& block : fit.blocks)
    for (double v : block) CHECK(v == 0.0);
  for (double v : predict(d, fit)) CHECK(v == doctest::Approx(mu));
}

TEST_CASE("lambda zero matches constrained least squares") {
  Rng rng(2024);
  const auto d = testutil::random_design(rng, 120, 3, 4);
  std::vector<double> y(d.n());
  for (int i = 0; i < d.n(); ++i)
    y[i] = 0.7 + 0.5 * d.level(i, 0) - 0.9 * d.level(i, 1) + 0.3 * rng.normal();

  FitConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_sweeps = 5000;
  const std::vector<double> lambda(3, 0.0), gamma(3, 2.0);
  const auto fit = fit_single_response(d, y, ActiveSet::universal(3), lambda, gamma, cfg);
  REQUIRE(fit.converged);

  const auto expected = testutil::dense_constrained_ls(d, y, testutil::singleton_pattern(d));
  for (int j = 0; j < 3; ++j)
    CHECK(testutil::max_abs_diff(fit.blocks[j], expected[j]) <= 1e-6);
}

TEST_CASE("empty active set pins everything") {
  Rng rng(55);
  const auto d = testutil::random_design(rng, 30, 3, 3);
  const auto y = random_response(rng, d);
  const std::vector<double> lambda(3, 0.01), gamma(3, 8.0);
  const auto fit = fit_single_response(d, y, ActiveSet::empty(3), lambda, gamma, FitConfig{});
  for (const auto& block : fit.blocks)
    for (double v : block) CHECK(v == 0.0);
}

TEST_CASE("objective is non-increasing across sweeps") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = testutil::random_design(rng, 50, 5, 4);
    const auto y = random_response(rng, d, 1.5);
    std::vector<double> lambda(5), gamma(5);
    for (int j = 0; j < 5; ++j) {
      lambda[j] = 0.05 * (1 + rng.below(5));
      gamma[j] = 2.0 + 2.0 * rng.below(3);
    }
    SweepTrace trace;
    FitConfig cfg;
    cfg.max_sweeps = 40;
    fit_single_response(d, y, ActiveSet::universal(5), lambda, gamma, cfg, &trace);
    REQUIRE(!trace.objective_per_sweep.empty());
    for (std::size_t s = 1; s < trace.objective_per_sweep.size(); ++s)
      CHECK(trace.objective_per_sweep[s] <= trace.objective_per_sweep[s - 1] + 1e-10);
  }
}

TEST_CASE("blockwise stationarity at exit") {
  Rng rng(77);
  const auto d = testutil::random_design(rng, 80, 4, 5);
  const auto y = random_response(rng, d, 1.0);
  const std::vector<double> lambda(4, 0.08), gamma(4, 4.0);
  FitConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_sweeps = 500;
  const auto fit = fit_single_response(d, y, ActiveSet::universal(4), lambda, gamma, cfg);
  REQUIRE(fit.converged);
  const double base = objective_value(d, y, fit, lambda, gamma);

  std::vector<double> residual(d.n());
  const auto yhat = predict(d, fit);
  for (int i = 0; i < d.n(); ++i) residual[i] = y[i] - yhat[i];

  for (int j = 0; j < 4; ++j) {
    std::vector<double> partial = residual;
    for (int i = 0; i < d.n(); ++i) partial[i] += fit.blocks[j][d.level(i, j) - 1];
    const auto [counts, means] = partial_residual_means(d, partial, j);
    BlockProblem bp{counts, means, static_cast<double>(d.n()), lambda[j], gamma[j]};
    const auto sol = solve_fused_block(bp);
    CoefficientFit resolved = fit;
    resolved.blocks[j] = center_block(sol.coefficients, counts).first;
    const double alt = objective_value(d, y, resolved, lambda, gamma);
    CHECK(base - alt < 1e-8);
  }
}

TEST_CASE("every emitted block satisfies the weighted sum-to-zero constraint") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = testutil::random_design(rng, 40, 4, 4);
    const auto y = random_response(rng, d, 2.0);
    std::vector<double> lambda(4, 0.02 * (trial + 1)), gamma(4, 8.0);
    const auto fit =
        fit_single_response(d, y, ActiveSet::universal(4), lambda, gamma, FitConfig{});
    for (int j = 0; j < 4; ++j) {
      double norm = 0.0;
      for (double v : fit.blocks[j]) norm = std::max(norm, std::abs(v));
      const double tol = norm > 0.0 ? 1e-8 * norm * d.n() : 1e-12;
      CHECK(std::abs(weighted_sum(fit.blocks[j], d.level_counts(j))) <= tol);
    }
  }
}

TEST_CASE("level relabeling permutes the fitted block") {
  Rng rng(808);
  const int n = 60, K = 5;
  std::vector<int> levels(n);
  for (auto& v : levels) v = 1 + static_cast<int>(rng.below(K));
  std::vector<std::vector<std::string>> labels{{"a", "b", "c", "d", "e"}};
  const CategoricalDesign d(n, 1, levels, {K}, labels);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = 0.8 * levels[i] + 0.4 * rng.normal();

  const std::vector<int> perm{3, 5, 1, 2, 4};  // new level of old level k
  std::vector<int> permuted(n);
  for (int i = 0; i < n; ++i) permuted[i] = perm[levels[i] - 1];
  const CategoricalDesign d2(n, 1, permuted, {K}, labels);

  const std::vector<double> lambda(1, 0.1), gamma(1, 4.0);
  const auto f1 = fit_single_response(d, y, ActiveSet::universal(1), lambda, gamma, FitConfig{});
  const auto f2 = fit_single_response(d2, y, ActiveSet::universal(1), lambda, gamma, FitConfig{});
  for (int k = 0; k < K; ++k)
    CHECK(f2.blocks[0][perm[k] - 1] == doctest::Approx(f1.blocks[0][k]).epsilon(1e-12));
}

TEST_CASE("adding a constant shifts only the intercept") {
  Rng rng(4242);
  const auto d = testutil::random_design(rng, 50, 3, 4);
  const auto y = random_response(rng, d, 1.0);
  std::vector<double> shifted = y;
  for (auto& v : shifted) v += 11.5;
  const std::vector<double> lambda(3, 0.07), gamma(3, 4.0);
  const auto f1 = fit_single_response(d, y, ActiveSet::universal(3), lambda, gamma, FitConfig{});
  const auto f2 =
      fit_single_response(d, shifted, ActiveSet::universal(3), lambda, gamma, FitConfig{});
  CHECK(f2.intercept == doctest::Approx(f1.intercept + 11.5).epsilon(1e-12));
  CHECK(testutil::max_abs_diff_blocks(f1, f2) <= 1e-9);
}

TEST_CASE("objective value closed forms") {
  Rng rng(5);
  const auto d = testutil::random_design(rng, 30, 2, 3);
  CoefficientFit fit;
  fit.blocks = {std::vector<double>(3, 0.0), std::vector<double>(3, 0.0)};
  const std::vector<double> lambda(2, 0.5), gamma(2, 3.0);

  fit.intercept = 2.5;
  const std::vector<double> constant(d.n(), 2.5);
  CHECK(objective_value(d, constant, fit, lambda, gamma) == doctest::Approx(0.0));

  const auto y = random_response(rng, d, 1.0);
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= d.n();
  fit.intercept = ybar;
  double expect = 0.0;
  for (double v : y) expect += (v - ybar) * (v - ybar);
  expect /= 2.0 * d.n();
  CHECK(objective_value(d, y, fit, lambda, gamma) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("single-predictor objective agrees with the block oracle") {
  Rng rng(6);
  const int n = 24, K = 4;
  std::vector<int> levels(n);
  for (auto& v : levels) v = 1 + static_cast<int>(rng.below(K));
  const CategoricalDesign d(n, 1, levels, {K}, {{"a", "b", "c", "d"}});
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = 0.6 * levels[i] + 0.5 * rng.normal();
  const std::vector<double> lambda(1, 0.15), gamma(1, 4.0);

  FitConfig cfg;
  cfg.tol = 1e-12;
  const auto fit = fit_single_response(d, y, ActiveSet::universal(1), lambda, gamma, cfg);

  // With one predictor the fit objective equals the block subproblem optimum
  // plus the within-level variance that no block coefficient can remove.
  std::vector<double> centered(y);
  for (auto& v : centered) v -= fit.intercept;
  const auto [counts, means] = partial_residual_means(d, centered, 0);
  BlockProblem bp{counts, means, static_cast<double>(d.n()), lambda[0], gamma[0]};
  const auto oracle = brute_force_block_oracle(bp);
  double within = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dev = centered[i] - means[levels[i] - 1];
    within += dev * dev;
  }
  const double expected = oracle.objective + within / (2.0 * n);
  CHECK(objective_value(d, y, fit, lambda, gamma) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("non-finite responses are rejected") {
  const CategoricalDesign d(2, 1, {1, 2}, {2}, {{"a", "b"}});
  const std::vector<double> lambda(1, 0.1), gamma(1, 2.0);
  CHECK_THROWS_AS(fit_single_response(d, {1.0, std::nan("")}, ActiveSet::universal(1), lambda,
                                      gamma, FitConfig{}),
                  std::invalid_argument);
}

TEST_CASE("sweep budget exhaustion flags the fit but keeps it valid") {
  Rng rng(21);
  const auto d = testutil::random_design(rng, 60, 5, 4);
  const auto y = random_response(rng, d, 2.0);
  const std::vector<double> lambda(5, 0.05), gamma(5, 8.0);
  FitConfig cfg;
  cfg.max_sweeps = 1;
  cfg.min_sweeps = 1;
  cfg.tol = 1e-16;
  const auto fit = fit_single_response(d, y, ActiveSet::universal(5), lambda, gamma, cfg);
  CHECK(!fit.converged);
  for (int j = 0; j < 5; ++j) {
    double norm = 0.0;
    for (double v : fit.blocks[j]) norm = std::max(norm, std::abs(v));
    const double tol = norm > 0.0 ? 1e-8 * norm * d.n() : 1e-12;
    CHECK(std::abs(weighted_sum(fit.blocks[j], d.level_counts(j))) <= tol);
  }
}

TEST_CASE("staged penalty walk finds a no-worse stationary point") {
  // Correlated design with a dense signal: the cold start tends to stall in
  // a poor basin; the staged walk must end at least as low.
  Rng rng(24601);
  const int n = 120, p = 12, K = 8;
  std::vector<int> levels(static_cast<std::size_t>(n) * p);
  for (int i = 0; i < n; ++i) {
    const double shared = rng.normal();
    for (int j = 0; j < p; ++j) {
      const double w = std::sqrt(0.8) * shared + std::sqrt(0.2) * rng.normal();
      const double u = 0.5 * std::erfc(-w * 0.7071067811865476);
      levels[static_cast<std::size_t>(i) * p + j] =
          std::min(K, static_cast<int>(std::floor(K * u)) + 1);
    }
  }
  std::vector<std::vector<std::string>> labels(p);
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < K; ++k) labels[j].push_back(std::string(1, 'a' + k));
  const CategoricalDesign d(n, p, levels, std::vector<int>(p, K), labels);

  std::vector<double> y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 6; ++j) y[i] += d.level(i, j) <= 5 ? -1.0 : 2.0;
    y[i] += 0.5 * rng.normal();
  }

  const std::vector<double> lambda(p, 0.15), gamma(p, 8.0);
  FitConfig cold;
  cold.max_sweeps = 400;
  FitConfig staged = cold;
  staged.path_stages = 6;
  const auto f_cold =
      fit_single_response(d, y, ActiveSet::universal(p), lambda, gamma, cold);
  const auto f_staged =
      fit_single_response(d, y, ActiveSet::universal(p), lambda, gamma, staged);
  const double obj_cold = objective_value(d, y, f_cold, lambda, gamma);
  const double obj_staged = objective_value(d, y, f_staged, lambda, gamma);
  CHECK(obj_staged <= obj_cold + 1e-9 * (1.0 + std::abs(obj_cold)));
  CHECK(f_staged.converged);

  // Stage count 1 with gamma continuation disabled is bit-identical to the
  // plain configuration.
  FitConfig plain = cold;
  plain.path_top = 99.0;  // ignored when path_stages == 1
  const auto f_plain =
      fit_single_response(d, y, ActiveSet::universal(p), lambda, gamma, plain);
  CHECK(testutil::max_abs_diff_blocks(f_cold, f_plain) == 0.0);
}

TEST_CASE("fit config validation") {
  FitConfig bad;
  bad.min_sweeps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = FitConfig{};
  bad.max_sweeps = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // below min_sweeps default
  bad = FitConfig{};
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "catfuse/lasso.hpp"
#include "catfuse/rng.hpp"
#include "test_util.hpp"

using namespace catfuse;

namespace {

std::vector<double> make_response(Rng& rng, const CategoricalDesign& d) {
  std::vector<double> y(d.n());
  for (int i = 0; i < d.n(); ++i)
    y[i] = 1.5 + 0.8 * d.level(i, 0) - 0.6 * d.level(i, 1 % d.p()) + 0.4 * rng.normal();
  return y;
}

}  // namespace

TEST_CASE("lambda zero equals constrained least squares after recentering") {
  Rng rng(404);
  const auto d = testutil::random_design(rng, 60, 2, 3);
  const auto y = make_response(rng, d);

  FitConfig cfg;
  cfg.tol = 1e-13;
  cfg.max_sweeps = 20000;
  const auto fit = lasso_baseline_fit(d, y, 0.0, cfg);
  REQUIRE(fit.converged);

  const auto expected = testutil::dense_constrained_ls(d, y, testutil::singleton_pattern(d));
  for (int j = 0; j < d.p(); ++j)
    CHECK(testutil::max_abs_diff(fit.blocks[j], expected[j]) <= 1e-6);

  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= d.n();
  CHECK(fit.intercept == doctest::Approx(ybar).epsilon(1e-12));
}

TEST_CASE("the soft-threshold deadzone nulls every coefficient") {
  Rng rng(405);
  const auto d = testutil::random_design(rng, 40, 3, 4);
  const auto y = make_response(rng, d);
  const double lmax = lasso_lambda_max(d, y);
  const auto fit = lasso_baseline_fit(d, y, lmax * 1.000001, FitConfig{});
  for (const auto& block : fit.blocks)
    for (double v : block) CHECK(v == 0.0);
  // Just below the threshold something must move.
  const auto fit2 = lasso_baseline_fit(d, y, lmax * 0.9, FitConfig{});
  bool any = false;
  for (const auto& block : fit2.blocks)
    for (double v : block) any = any || v != 0.0;
  CHECK(any);
}

TEST_CASE("objective decreases sweep by sweep") {
  Rng rng(406);
  for (double lambda : {0.0, 0.02, 0.1}) {
    const auto d = testutil::random_design(rng, 50, 3, 4);
    const auto y = make_response(rng, d);
    SweepTrace trace;
    FitConfig cfg;
    cfg.max_sweeps = 30;
    lasso_baseline_fit(d, y, lambda, cfg, &trace);
    REQUIRE(!trace.objective_per_sweep.empty());
    for (std::size_t s = 1; s < trace.objective_per_sweep.size(); ++s)
      CHECK(trace.objective_per_sweep[s] <= trace.objective_per_sweep[s - 1] + 1e-10);
  }
}

TEST_CASE("emitted blocks are recentered") {
  Rng rng(407);
  const auto d = testutil::random_design(rng, 50, 3, 4);
  const auto y = make_response(rng, d);
  const auto fit = lasso_baseline_fit(d, y, 0.01, FitConfig{});
  for (int j = 0; j < d.p(); ++j) {
    double weighted = 0.0, norm = 0.0;
    for (int k = 0; k < d.num_levels(j); ++k) {
      weighted += d.level_counts(j)[k] * fit.blocks[j][k];
      norm = std::max(norm, std::abs(fit.blocks[j][k]));
    }
    CHECK(std::abs(weighted) <= (norm > 0 ? 1e-8 * norm * d.n() : 1e-12));
  }
}

TEST_CASE("input validation") {
  const CategoricalDesign d(2, 1, {1, 2}, {2}, {{"a", "b"}});
  CHECK_THROWS_AS(lasso_baseline_fit(d, {1.0, 2.0}, -0.5, FitConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(lasso_baseline_fit(d, {1.0}, 0.1, FitConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(lasso_baseline_fit(d, {1.0, std::nan("")}, 0.1, FitConfig{}),
                  std::invalid_argument);
}

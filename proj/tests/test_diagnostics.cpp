#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "catfuse/diagnostics.hpp"
#include "catfuse/rng.hpp"
#include "catfuse/simulation.hpp"
#include "test_util.hpp"

using namespace catfuse;

TEST_CASE("scenario 1 signal structure") {
  const auto d = gen_correlated_categorical(200, 5, 24, 0.0, 42);
  const auto truth = scenario_coefficients(1, 5, 24);
  const auto params = PenaltyParams::constant(2, 5, 0.1, 8.0);
  const auto diag = compute_diagnostics(d, truth, params);

  for (int j = 0; j < 3; ++j) {
    CHECK(diag.s[0][j] == 3);  // values {-3, 0, 3}
    CHECK(diag.delta[0][j] == doctest::Approx(3.0));
    CHECK(diag.s[1][j] == 3);
    CHECK(diag.delta[1][j] == doctest::Approx(3.0));
  }
  for (int j = 3; j < 5; ++j) {
    CHECK(diag.s[0][j] == 1);  // null block
    CHECK(std::isinf(diag.delta[0][j]));
    CHECK(diag.separation_ok[0][j]);  // constant blocks pass trivially
  }
}

TEST_CASE("scenario 2 signal structure") {
  const auto d = gen_correlated_categorical(200, 30, 24, 0.0, 43);
  const auto truth = scenario_coefficients(2, 30, 24);
  const auto params = PenaltyParams::constant(2, 30, 0.1, 8.0);
  const auto diag = compute_diagnostics(d, truth, params);

  CHECK(diag.s[0][24] == 2);  // response 1, j = 25: values {-2, 3}
  CHECK(diag.delta[0][24] == doctest::Approx(5.0));
  CHECK(diag.s[1][9] == 2);  // response 2, j = 10: values {-3, 3}
  CHECK(diag.delta[1][9] == doctest::Approx(6.0));
  CHECK(diag.s[1][10] == 1);  // response 2 support stops at j = 10
}

TEST_CASE("hand-checkable c_min") {
  // p = 1, K = 2, one observation per level, singleton truth: the coefficient
  // map is ((y1-y2)/2, (y2-y1)/2), whose rows have squared norm 1/2.
  const CategoricalDesign d(2, 1, {1, 2}, {2}, {{"a", "b"}});
  std::vector<CoefficientFit> truth(1);
  truth[0].blocks = {{1.0, -1.0}};
  const auto params = PenaltyParams::constant(1, 1, 0.1, 8.0);
  const auto diag = compute_diagnostics(d, truth, params);
  CHECK(diag.c_min == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(diag.m_j_min[0] == 1.0);
  CHECK(diag.n_j_min[0] == 1.0);
  CHECK(diag.n_j_max[0] == 1.0);
  CHECK(diag.log_term[0] == doctest::Approx(std::log(2.0)));
}

TEST_CASE("eta matches a brute-force feasibility scan") {
  Rng rng(77);
  const auto d = testutil::random_design(rng, 90, 3, 4);
  std::vector<CoefficientFit> truth(2);
  for (int l = 0; l < 2; ++l) truth[l].blocks.assign(3, std::vector<double>(4, 0.0));
  truth[0].blocks[0] = {1.0, 1.0, -1.0, -1.0};
  truth[0].blocks[1] = {2.0, 0.0, 0.0, -2.0};
  truth[1].blocks[0] = {1.0, -1.0, -1.0, -1.0};
  const auto params = PenaltyParams::constant(2, 3, 0.05, 8.0);
  const auto diag = compute_diagnostics(d, truth, params);

  auto feasible = [&](double eta) {
    for (int j = 0; j < 3; ++j) {
      int s_min = std::min(diag.s[0][j], diag.s[1][j]);
      int s_max = std::max(diag.s[0][j], diag.s[1][j]);
      if (eta / s_max > diag.n_j_min[j] / d.n() + 1e-12) return false;
      if (diag.n_j_max[j] / d.n() > 1.0 / (eta * s_min) + 1e-12) return false;
    }
    return true;
  };
  double best = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double eta = i / 2000.0;
    if (feasible(eta)) best = eta;
  }
  CHECK(diag.eta_feasible == doctest::Approx(best).epsilon(2e-3));
  CHECK(feasible(diag.eta_feasible));
}

TEST_CASE("separation flag responds to the penalty scale") {
  Rng rng(12);
  const auto d = testutil::random_design(rng, 120, 2, 4);
  std::vector<CoefficientFit> truth(1);
  truth[0].blocks.assign(2, std::vector<double>(4, 0.0));
  truth[0].blocks[0] = {-3.0, -3.0, 3.0, 3.0};  // delta = 6

  const auto small = compute_diagnostics(d, truth, PenaltyParams::constant(1, 2, 0.02, 4.0));
  CHECK(small.separation_ok[0][0]);
  const auto large = compute_diagnostics(d, truth, PenaltyParams::constant(1, 2, 50.0, 4.0));
  CHECK(!large.separation_ok[0][0]);
  CHECK(large.separation_ok[0][1]);  // constant block stays trivially fine
}

TEST_CASE("gamma_star and the exponents") {
  const CategoricalDesign d(4, 1, {1, 2, 1, 2}, {2}, {{"a", "b"}});
  std::vector<CoefficientFit> truth(2);
  truth[0].blocks = {{1.0, -1.0}};
  truth[1].blocks = {{0.0, 0.0}};
  PenaltyParams params = PenaltyParams::constant(2, 1, 0.5, 3.0);
  params.lambda[1][0] = 0.25;
  const auto diag = compute_diagnostics(d, truth, params);

  // s_max = 2, eta = min(1, 2 * (2/4), 4/(4*1)) = 1
  CHECK(diag.eta_feasible == doctest::Approx(1.0));
  CHECK(diag.gamma_star[0] == doctest::Approx(3.0));  // max(gamma_max, eta*s_max) = max(3, 2)
  // literal exponent uses response 1's s and lambda
  const double nc = std::min(diag.n_j_min[0], diag.c_min);
  CHECK(diag.prob_exponent_literal[0] ==
        doctest::Approx(nc * 1.0 * 3.0 * 2 * 0.25 / 8.0));
  // conservative takes the min over responses of s * lambda^2
  const double worst = std::min(2 * 0.25, 1 * 0.0625);
  CHECK(diag.prob_exponent_conservative[0] == doctest::Approx(nc * 1.0 * 3.0 * worst / 8.0));
  CHECK(diag.log_term[0] == doctest::Approx(std::log(4.0)));
}

TEST_CASE("shape validation") {
  const CategoricalDesign d(2, 1, {1, 2}, {2}, {{"a", "b"}});
  std::vector<CoefficientFit> truth(1);
  truth[0].blocks = {{1.0, -1.0, 0.0}};  // wrong K
  CHECK_THROWS_AS(compute_diagnostics(d, truth, PenaltyParams::constant(1, 1, 0.1, 2.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_diagnostics(d, {}, PenaltyParams::constant(1, 1, 0.1, 2.0)),
                  std::invalid_argument);
}

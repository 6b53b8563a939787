#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "catfuse/block_solver.hpp"
#include "catfuse/rng.hpp"
#include "test_util.hpp"

using namespace catfuse;

namespace {

int cluster_count(const BlockSolution& sol) {
  int top = -1;
  for (int c : sol.cluster_assignment) top = std::max(top, c);
  return top + 1;
}

}  // namespace

TEST_CASE("mcp closed form") {
  CHECK(mcp_value(0.0, 1.0, 2.0) == 0.0);
  CHECK(mcp_value(5.0, 1.0, 2.0) == doctest::Approx(1.0));   // saturated at gamma lambda^2/2
  CHECK(mcp_value(1.0, 1.0, 2.0) == doctest::Approx(0.75));  // lambda x - x^2/(2 gamma)
  CHECK(mcp_value(3.0, 0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(mcp_value(-1.0, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(mcp_value(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mcp_value(1.0, -1.0, 2.0), std::invalid_argument);
}

TEST_CASE("lambda zero separates to weighted means") {
  BlockProblem prob{{2.0, 3.0}, {-3.0, 2.0}, 5.0, 0.0, 2.0};
  const auto sol = solve_fused_block(prob);
  CHECK(sol.coefficients == std::vector<double>{-3.0, 2.0});
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("heavy penalty fuses everything at the weighted mean") {
  BlockProblem prob{{1.0, 1.0, 1.0}, {-1.0, 0.0, 1.0}, 3.0, 10.0, 2.0};
  const auto sol = solve_fused_block(prob);
  CHECK(sol.coefficients == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(cluster_count(sol) == 1);
  const auto oracle = brute_force_block_oracle(prob);
  CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-12));
}

TEST_CASE("saturated two-cluster split") {
  BlockProblem prob{{1.0, 1.0, 1.0, 1.0}, {-5.0, -5.0, 5.0, 5.0}, 4.0, 0.5, 2.0};
  const auto sol = solve_fused_block(prob);
  CHECK(sol.coefficients == std::vector<double>{-5.0, -5.0, 5.0, 5.0});
  CHECK(cluster_count(sol) == 2);
  // between-cluster gap saturated: penalty = gamma lambda^2 / 2
  CHECK(sol.objective == doctest::Approx(0.25));
  const auto oracle = brute_force_block_oracle(prob);
  CHECK(oracle.objective == doctest::Approx(0.25));
}

TEST_CASE("golden small problem agrees with the oracle") {
  BlockProblem prob{{1.0, 2.0}, {1.0, -0.5}, 3.0, 0.3, 3.0};
  const auto sol = solve_fused_block(prob);
  const auto oracle = brute_force_block_oracle(prob);
  CHECK(std::abs(sol.objective - oracle.objective) <= 1e-9);
  // Frozen from the oracle's first run: the 1.5 gap saturates (>= gamma
  // lambda = 0.9), so the targets stand and the objective is the flat
  // penalty gamma lambda^2 / 2 = 0.135.
  CHECK(sol.objective == doctest::Approx(0.135).epsilon(1e-9));
  CHECK(sol.coefficients[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.coefficients[1] == doctest::Approx(-0.5).epsilon(1e-7));
}

TEST_CASE("zero-weight levels are pinned and skipped") {
  BlockProblem prob{{1.0, 0.0, 2.0}, {1.0, 99.0, -1.0}, 3.0, 0.2, 4.0};
  const auto sol = solve_fused_block(prob);
  CHECK(sol.coefficients[1] == 0.0);
  CHECK(sol.cluster_assignment[1] == -1);
  const auto oracle = brute_force_block_oracle(prob);
  CHECK(oracle.coefficients[1] == 0.0);
  CHECK(std::abs(sol.objective - oracle.objective) <= 1e-9);
}

TEST_CASE("oracle with lambda zero returns the targets") {
  BlockProblem prob{{1.0, 3.0, 2.0}, {0.4, -1.2, 2.5}, 6.0, 0.0, 4.0};
  const auto oracle = brute_force_block_oracle(prob);
  CHECK(oracle.coefficients == std::vector<double>{0.4, -1.2, 2.5});
  CHECK(oracle.objective == doctest::Approx(0.0));
}

TEST_CASE("single level returns its target") {
  BlockProblem prob{{1.0}, {7.0}, 1.0, 2.0, 3.0};
  CHECK(solve_fused_block(prob).coefficients == std::vector<double>{7.0});
  CHECK(brute_force_block_oracle(prob).coefficients == std::vector<double>{7.0});
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(solve_fused_block(BlockProblem{{0.0, 0.0}, {1.0, 2.0}, 2.0, 1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_fused_block(BlockProblem{{1.0}, {1.0, 2.0}, 2.0, 1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_fused_block(BlockProblem{{1.0}, {1.0}, 1.0, -1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_fused_block(BlockProblem{{1.0}, {1.0}, 1.0, 1.0, 0.0}),
                  std::invalid_argument);
  BlockProblem nine{std::vector<double>(9, 1.0), std::vector<double>(9, 0.0), 9.0, 1.0, 2.0};
  CHECK_THROWS_AS(brute_force_block_oracle(nine), std::invalid_argument);
  CHECK_NOTHROW(solve_fused_block(nine));
}

TEST_CASE("oracle equivalence on random problems") {
  Rng rng(424242);
  int near_ties = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const BlockProblem prob = testutil::random_block_problem(rng);
    const auto sol = solve_fused_block(prob);
    const auto oracle = brute_force_block_oracle(prob);
    REQUIRE(std::abs(sol.objective - oracle.objective) <= 1e-6);
    if (testutil::max_abs_diff(sol.coefficients, oracle.coefficients) > 1e-5) {
      // Allowed only when the two candidates genuinely tie.
      ++near_ties;
      CHECK(std::abs(block_objective(prob, sol.coefficients) -
                     block_objective(prob, oracle.coefficients)) <= 1e-8);
    }
  }
  CHECK(near_ties <= 3);
}

TEST_CASE("solution preserves the target order") {
  Rng rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    const BlockProblem prob = testutil::random_block_problem(rng);
    const auto sol = solve_fused_block(prob);
    std::vector<int> order(prob.num_levels());
    for (int k = 0; k < prob.num_levels(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return prob.targets[a] < prob.targets[b]; });
    double prev = -1e300;
    for (int k : order) {
      if (prob.weights[k] <= 0.0) continue;
      CHECK(sol.coefficients[k] >= prev - 1e-12);
      prev = sol.coefficients[k];
    }
  }
}

TEST_CASE("coefficients stay inside the target range") {
  Rng rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const BlockProblem prob = testutil::random_block_problem(rng);
    const auto sol = solve_fused_block(prob);
    double tmin = 1e300, tmax = -1e300;
    for (int k = 0; k < prob.num_levels(); ++k)
      if (prob.weights[k] > 0.0) {
        tmin = std::min(tmin, prob.targets[k]);
        tmax = std::max(tmax, prob.targets[k]);
      }
    for (int k = 0; k < prob.num_levels(); ++k)
      if (prob.weights[k] > 0.0) {
        CHECK(sol.coefficients[k] >= tmin - 1e-9);
        CHECK(sol.coefficients[k] <= tmax + 1e-9);
      }
  }
}

TEST_CASE("well separated clusters stay inside their own target spans") {
  // Two target groups far beyond the saturation width: each cluster's value
  // is sandwiched by its own extremes.
  BlockProblem prob{{2.0, 1.0, 1.0, 1.0, 2.0, 1.0},
                    {0.0, 0.1, 0.2, 6.0, 6.1, 6.3},
                    8.0,
                    0.1,
                    4.0};
  const auto sol = solve_fused_block(prob);
  CHECK(cluster_count(sol) == 2);
  CHECK(sol.coefficients[0] >= 0.0 - 1e-12);
  CHECK(sol.coefficients[2] <= 0.2 + 1e-12);
  CHECK(sol.coefficients[3] >= 6.0 - 1e-12);
  CHECK(sol.coefficients[5] <= 6.3 + 1e-12);
  CHECK(sol.coefficients[0] == sol.coefficients[1]);
  CHECK(sol.coefficients[1] == sol.coefficients[2]);
}

TEST_CASE("scaling equivariance") {
  Rng rng(909);
  for (int trial = 0; trial < 100; ++trial) {
    BlockProblem prob = testutil::random_block_problem(rng);
    const double c = 0.25 + 3.0 * rng.uniform01();
    BlockProblem scaled = prob;
    for (auto& t : scaled.targets) t *= c;
    scaled.lambda *= c;
    const auto base = solve_fused_block(prob);
    const auto sc = solve_fused_block(scaled);
    for (int k = 0; k < prob.num_levels(); ++k)
      CHECK(sc.coefficients[k] == doctest::Approx(c * base.coefficients[k]).epsilon(1e-8));
  }
}

TEST_CASE("fusion is monotone in lambda") {
  BlockProblem prob{{2.0, 1.0, 3.0, 1.0, 1.0, 2.0},
                    {-2.5, -1.8, -0.3, 0.4, 1.6, 2.7},
                    10.0,
                    0.0,
                    4.0};
  int prev = prob.num_levels() + 1;
  for (double lam : {0.0, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
    prob.lambda = lam;
    const int count = cluster_count(solve_fused_block(prob));
    CHECK(count <= prev);
    prev = count;
  }
  CHECK(prev == 1);
}

TEST_CASE("zero targets with balanced weights give the zero vector") {
  for (double lam : {0.0, 0.1, 1.0, 10.0})
    for (double gam : {1.5, 4.0, 8.0}) {
      BlockProblem prob{{2.0, 2.0, 2.0, 2.0}, {0.0, 0.0, 0.0, 0.0}, 8.0, lam, gam};
      const auto sol = solve_fused_block(prob);
      CHECK(sol.coefficients == std::vector<double>(4, 0.0));
    }
}

TEST_CASE("equal targets always fuse") {
  BlockProblem prob{{1.0, 2.0, 1.0}, {1.5, 1.5, -0.5}, 4.0, 0.05, 8.0};
  const auto sol = solve_fused_block(prob);
  CHECK(sol.coefficients[0] == sol.coefficients[1]);
  CHECK(sol.cluster_assignment[0] == sol.cluster_assignment[1]);
}

TEST_CASE("large-block strategy tracks the exact path") {
  Rng rng(60601);
  int agree = 0, total = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 150; ++trial) {
    const BlockProblem prob = testutil::random_block_problem(rng, 6, 9);
    const auto exact = detail::solve_fused_block_exact(prob);
    const auto dp = detail::solve_fused_block_dp(prob);
    ++total;
    const double gap = dp.objective - exact.objective;
    CHECK(gap >= -1e-9);  // the exact path is a global minimum
    worst = std::max(worst, gap / (1.0 + std::abs(exact.objective)));
    if (gap <= 1e-7) ++agree;
  }
  INFO("agreement ", agree, "/", total, " worst relative gap ", worst);
  CHECK(agree >= total * 9 / 10);
  CHECK(worst <= 5e-2);
}

TEST_CASE("objective field matches an independent evaluation") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const BlockProblem prob = testutil::random_block_problem(rng);
    const auto sol = solve_fused_block(prob);
    const double recompute = block_objective(prob, sol.coefficients);
    CHECK(std::abs(sol.objective - recompute) <=
          1e-10 * (1.0 + std::abs(recompute)));
  }
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catfuse/design.hpp"
#include "catfuse/model.hpp"
#include "catfuse/multi_response.hpp"

namespace catfuse {

/// Benchmark scenario: n, p, K, noise sd, predictor correlation, scenario id,
/// replication count, base seed.
struct ScenarioSpec {
  int n = 200;
  int p = 100;
  int K = 24;
  double sigma = 1.0;
  double rho = 0.0;
  int scenario_id = 1;
  int replications = 100;
  std::uint64_t base_seed = 1;

  void validate() const;
};

enum class StudyMode { iterative, one_pass, univariate_baseline, lasso_baseline };

std::string to_string(StudyMode mode);
StudyMode study_mode_from_string(const std::string& s);

struct ReplicationRow {
  int replication = 0;
  std::vector<double> l2_error;       // per response
  std::vector<double> mse;            // per response, noiseless test signal
  std::vector<double> lambda_chosen;  // per response (multiplier)
  double runtime_seconds = 0.0;
};

struct MetricsReport {
  ScenarioSpec spec;
  StudyMode mode = StudyMode::iterative;
  std::vector<ReplicationRow> rows;
  std::vector<double> mean_l2, sd_l2;    // per response
  std::vector<double> mean_mse, sd_mse;  // per response
};

/// Knobs of the replication harness that the scenario itself does not pin
/// down. fixed_lambda < 0 means tune by cross-validation. Study fits use the
/// plain cold-start solve by default; set fit.path_stages above 1 for the
/// staged penalty walk on strongly collinear designs.
struct StudyOptions {
  int cv_folds = 5;
  std::vector<double> lambda_grid;  // empty -> default_lambda_grid()
  double gamma = kDefaultGamma;
  double fixed_lambda = -1.0;  // multiplier on sqrt(log K_j / n)
  int max_rounds = 8;
  FitConfig fit;
  int threads = 0;  // 0 -> hardware concurrency
};

/// Uniform copula draws: W ~ N_p(0, Sigma) with unit diagonal and constant
/// off-diagonal rho, mapped through the standard normal CDF. Row-major n x p.
std::vector<double> gen_copula_uniforms(int n, int p, double rho, std::uint64_t seed);

/// Correlated categorical design: level = floor(K u) + 1 clamped to K.
/// Labels are zero-padded decimals so lexicographic order matches level order.
CategoricalDesign gen_correlated_categorical(int n, int p, int K, double rho,
                                             std::uint64_t seed);

/// True two-response coefficient tables for the benchmark scenarios
/// (uncentered). Requires K = 24; scenario 1 needs p >= 3, scenario 2 p >= 25.
std::vector<CoefficientFit> scenario_coefficients(int scenario_id, int p, int K);

/// sqrt of the summed squared coefficient differences over all blocks.
double l2_error(const CoefficientFit& estimate, const CoefficientFit& truth_centered);

/// Mean squared prediction error of a fit against a clean signal.
double prediction_mse(const CategoricalDesign& d_test, const std::vector<double>& y_clean,
                      const CoefficientFit& fit);

/// Full replication harness: per replication, generate data with seed
/// base_seed xor r, tune, fit with the chosen mode, and score against the
/// count-weighted-centered truth and a fresh noiseless test sample.
/// Deterministic given (spec, mode, options); replications may run on
/// several threads.
MetricsReport run_study(const ScenarioSpec& spec, StudyMode mode,
                        const StudyOptions& options = StudyOptions{});

}  // namespace catfuse

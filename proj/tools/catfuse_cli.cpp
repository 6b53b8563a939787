// catfuse command line: fit categorical-fusion models on CSV data, tune by
// cross-validation, run simulation studies, compute recovery diagnostics, and
// apply saved fits to new data.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "catfuse/csv.hpp"
#include "catfuse/design.hpp"
#include "catfuse/diagnostics.hpp"
#include "catfuse/fit_engine.hpp"
#include "catfuse/model.hpp"
#include "catfuse/multi_response.hpp"
#include "catfuse/report.hpp"
#include "catfuse/rng.hpp"
#include "catfuse/simulation.hpp"

using catfuse::Json;

namespace {

struct CliOptions {
  std::string input, config, output, report, truth, coef_csv, aggregate_csv;
  std::string mode = "iterative";
  std::string split_by;
  double lambda = -1.0;  // fixed multiplier; < 0 means cross-validate
  double gamma = catfuse::kDefaultGamma;
  int folds = 5;
  double test_fraction = 0.0;
  std::uint64_t seed = 1;
  int max_rounds = 8;
  int scenario = 1;
  double sigma = 1.0;
  double rho = 0.0;
  int replications = 20;
  int n = 200, p = 100, K = 24;
  int threads = 0;
};

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("unparseable config " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

// Column roles from the config; every CSV column must be covered.
struct Roles {
  std::vector<std::string> categorical;
  std::vector<std::string> response;
};

Roles resolve_roles(const Json& config, const catfuse::CsvTable& table) {
  if (!config.contains("columns") || !config["columns"].is_object())
    throw std::runtime_error("config: missing \"columns\" role map");
  Roles roles;
  std::set<std::string> covered;
  for (const auto& [name, role] : config["columns"].items()) {
    if (table.col_index(name) < 0) throw std::runtime_error("unknown column: " + name);
    const std::string r = role.get<std::string>();
    if (r == "categorical")
      roles.categorical.push_back(name);
    else if (r == "response")
      roles.response.push_back(name);
    else if (r != "ignore")
      throw std::runtime_error("config: bad role \"" + r + "\" for column " + name);
    covered.insert(name);
  }
  for (const auto& name : table.header)
    if (!covered.count(name))
      throw std::runtime_error("config: column has no role: " + name);
  if (roles.response.empty()) throw std::runtime_error("config: no response column");
  if (roles.categorical.empty()) throw std::runtime_error("config: no categorical column");

  // No imputation: an empty cell in any used column is an error.
  auto check_filled = [&](const std::vector<std::string>& names) {
    for (const auto& name : names) {
      const int c = table.col_index(name);
      for (int r = 0; r < table.num_rows(); ++r)
        if (table.rows[r][c].empty()) {
          std::ostringstream msg;
          msg << "missing cell in column " << name << " (data row " << (r + 1) << ")";
          throw std::runtime_error(msg.str());
        }
    }
  };
  check_filled(roles.categorical);
  check_filled(roles.response);
  // Keep CSV header order.
  auto by_header = [&](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end(), [&](const std::string& a, const std::string& b) {
      return table.col_index(a) < table.col_index(b);
    });
  };
  by_header(roles.categorical);
  by_header(roles.response);
  return roles;
}

std::vector<double> parse_response(const catfuse::CsvTable& table, const std::string& name,
                                   const std::vector<int>& rows) {
  const int c = table.col_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (int r : rows) {
    const std::string& cell = table.rows[r][c];
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error("non-numeric response in column " + name + ": \"" + cell + "\"");
    }
  }
  return out;
}

bool is_binary(const std::vector<double>& y) {
  for (double v : y)
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

catfuse::FitConfig fit_config_from(const Json& config) {
  catfuse::FitConfig cfg;
  if (config.contains("fit")) {
    const Json& f = config["fit"];
    if (f.contains("max_sweeps")) cfg.max_sweeps = f["max_sweeps"].get<int>();
    if (f.contains("tol")) cfg.tol = f["tol"].get<double>();
    if (f.contains("min_sweeps")) cfg.min_sweeps = f["min_sweeps"].get<int>();
  }
  cfg.validate();
  return cfg;
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "_" : out;
}

std::string insert_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + "." + suffix;
  return path.substr(0, dot) + "." + suffix + path.substr(dot);
}

// One complete fit pipeline over the given rows; returns the report.
Json fit_rows(const catfuse::CsvTable& table, const Roles& roles, const Json& config,
              const CliOptions& opt, const std::vector<int>& rows) {
  // Train/test split.
  std::vector<int> train_rows = rows, test_rows;
  if (opt.test_fraction > 0.0) {
    if (opt.test_fraction >= 1.0) throw std::runtime_error("test fraction must be in [0,1)");
    std::vector<int> perm = rows;
    catfuse::Rng rng(catfuse::derive_seed(opt.seed, 77));
    rng.shuffle(perm);
    const int n_test = static_cast<int>(std::lround(opt.test_fraction * perm.size()));
    test_rows.assign(perm.begin(), perm.begin() + n_test);
    train_rows.assign(perm.begin() + n_test, perm.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    if (train_rows.empty()) throw std::runtime_error("empty training split");
  }

  std::vector<std::vector<std::string>> cat_columns;
  for (const auto& name : roles.categorical) {
    const int c = table.col_index(name);
    std::vector<std::string> col;
    col.reserve(train_rows.size());
    for (int r : train_rows) col.push_back(table.rows[r][c]);
    cat_columns.push_back(std::move(col));
  }
  const catfuse::CategoricalDesign design = catfuse::ingest_design(cat_columns);

  std::vector<std::vector<double>> ycols;
  std::vector<bool> binary;
  for (const auto& name : roles.response) {
    ycols.push_back(parse_response(table, name, train_rows));
    binary.push_back(is_binary(ycols.back()));
  }
  const catfuse::ResponseMatrix Y(ycols);
  const int q = Y.q();

  const catfuse::FitConfig fit_cfg = fit_config_from(config);

  catfuse::PenaltyParams params;
  Json cv_section;
  if (opt.lambda >= 0.0) {
    params.lambda.assign(q, std::vector<double>(design.p(), 0.0));
    params.gamma.assign(q, std::vector<double>(design.p(), opt.gamma));
    for (int l = 0; l < q; ++l)
      for (int j = 0; j < design.p(); ++j)
        params.lambda[l][j] = opt.lambda * catfuse::lambda_scale(design, j);
    cv_section["fixed_multiplier"] = opt.lambda;
  } else {
    const auto grid = catfuse::default_lambda_grid();
    std::vector<std::vector<double>> cv_err;
    params = catfuse::cross_validate(design, Y, grid, opt.gamma, opt.folds,
                                     catfuse::derive_seed(opt.seed, 11), true, fit_cfg, &cv_err);
    cv_section["grid"] = grid;
    Json selected = Json::array();
    for (int l = 0; l < q; ++l) {
      std::size_t best = 0;
      for (std::size_t g = 1; g < grid.size(); ++g)
        if (cv_err[l][g] < cv_err[l][best]) best = g;
      selected.push_back(grid[best]);
    }
    cv_section["selected_multiplier"] = selected;
    cv_section["mean_cv_error"] = cv_err;
    cv_section["folds"] = opt.folds;
  }

  catfuse::MultiFit fit;
  if (opt.mode == "iterative")
    fit = catfuse::iterative_q_step(design, Y, params, fit_cfg, opt.max_rounds);
  else if (opt.mode == "one-pass")
    fit = catfuse::one_pass_q_step(design, Y, params, fit_cfg);
  else
    throw std::runtime_error("unknown mode: " + opt.mode);

  Json report;
  report["schema_version"] = catfuse::kReportSchemaVersion;
  report["kind"] = "fit";
  report["generated_at"] = catfuse::timestamp_utc();
  report["command"] = {{"mode", opt.mode},
                       {"seed", opt.seed},
                       {"gamma", opt.gamma},
                       {"max_rounds", opt.max_rounds},
                       {"test_fraction", opt.test_fraction}};
  report["n_train"] = static_cast<int>(train_rows.size());
  report["n_test"] = static_cast<int>(test_rows.size());
  report["predictors"] = roles.categorical;
  Json resp_meta = Json::array();
  for (int l = 0; l < q; ++l)
    resp_meta.push_back(Json{{"name", roles.response[l]}, {"binary", bool(binary[l])}});
  report["response_columns"] = resp_meta;
  report["cv"] = cv_section;
  report["rounds"] = fit.rounds_completed;
  report["converged"] = fit.converged;
  report["responses"] =
      catfuse::fit_report_responses(design, roles.categorical, roles.response, fit);
  for (std::size_t l = 0; l < fit.fits.size(); ++l)
    report["responses"][l]["objective"] = catfuse::objective_value(
        design, Y.col(static_cast<int>(l)), fit.fits[l], params.lambda[l], params.gamma[l]);
  report["active_history"] = catfuse::active_history_json(roles.categorical, fit);

  long unseen = 0;
  if (!test_rows.empty()) {
    std::vector<std::vector<std::string>> test_cols(table.num_cols());
    for (int c = 0; c < table.num_cols(); ++c) {
      test_cols[c].reserve(test_rows.size());
      for (int r : test_rows) test_cols[c].push_back(table.rows[r][c]);
    }
    const auto pred = catfuse::predict_from_report(report, table.header, test_cols);
    unseen = pred.unseen_count;
    Json metrics = Json::array();
    for (int l = 0; l < q; ++l) {
      const auto ytest = parse_response(table, roles.response[l], test_rows);
      double sse = 0.0;
      long misclassified = 0;
      for (std::size_t i = 0; i < ytest.size(); ++i) {
        const double dev = pred.predictions[l][i] - ytest[i];
        sse += dev * dev;
        if (binary[l] && (pred.predictions[l][i] >= 0.5 ? 1.0 : 0.0) != ytest[i])
          ++misclassified;
      }
      Json m{{"response", roles.response[l]},
             {"predicted_mse", sse / ytest.size()}};
      if (binary[l])
        m["misclassification_rate"] = static_cast<double>(misclassified) / ytest.size();
      metrics.push_back(std::move(m));
    }
    report["test_metrics"] = metrics;
  }
  report["warnings"] = {{"unseen_level_predictions", unseen}};

  if (!opt.coef_csv.empty()) {
    catfuse::write_csv_file(opt.coef_csv,
                            {"level", "predictor", "response", "coefficient", "group_id"},
                            catfuse::coefficient_csv_rows(design, roles.categorical,
                                                          roles.response, fit));
  }
  return report;
}

int cmd_fit(const CliOptions& opt) {
  const catfuse::CsvTable table = catfuse::read_csv_file(opt.input);
  const Json config = opt.config.empty() ? Json{{"columns", Json::object()}}
                                         : load_json_file(opt.config);
  Roles roles = resolve_roles(config, table);

  std::vector<int> all_rows(table.num_rows());
  for (int i = 0; i < table.num_rows(); ++i) all_rows[i] = i;
  if (all_rows.empty()) throw std::runtime_error("input has no data rows");

  if (opt.split_by.empty()) {
    const Json report = fit_rows(table, roles, config, opt, all_rows);
    write_json_file(opt.output, report);
    std::cout << "wrote " << opt.output << "\n";
    return 0;
  }

  const int split_col = table.col_index(opt.split_by);
  if (split_col < 0) throw std::runtime_error("unknown column: " + opt.split_by);
  Roles sub_roles = roles;
  sub_roles.categorical.erase(
      std::remove(sub_roles.categorical.begin(), sub_roles.categorical.end(), opt.split_by),
      sub_roles.categorical.end());
  if (sub_roles.categorical.empty())
    throw std::runtime_error("split-by removes the only categorical predictor");

  std::map<std::string, std::vector<int>> groups;
  for (int r = 0; r < table.num_rows(); ++r) groups[table.rows[r][split_col]].push_back(r);
  for (const auto& [value, rows] : groups) {
    CliOptions sub = opt;
    sub.coef_csv = opt.coef_csv.empty() ? "" : insert_suffix(opt.coef_csv, sanitize_label(value));
    Json report = fit_rows(table, sub_roles, config, sub, rows);
    report["split"] = {{"column", opt.split_by}, {"value", value}};
    const std::string path = insert_suffix(opt.output, sanitize_label(value));
    write_json_file(path, report);
    std::cout << "wrote " << path << " (" << opt.split_by << " = " << value << ", n = "
              << rows.size() << ")\n";
  }
  return 0;
}

int cmd_cv(const CliOptions& opt) {
  const catfuse::CsvTable table = catfuse::read_csv_file(opt.input);
  const Json config = load_json_file(opt.config);
  const Roles roles = resolve_roles(config, table);

  std::vector<int> rows(table.num_rows());
  for (int i = 0; i < table.num_rows(); ++i) rows[i] = i;

  std::vector<std::vector<std::string>> cat_columns;
  for (const auto& name : roles.categorical) {
    const int c = table.col_index(name);
    cat_columns.push_back(table.column(c));
  }
  const catfuse::CategoricalDesign design = catfuse::ingest_design(cat_columns);
  std::vector<std::vector<double>> ycols;
  for (const auto& name : roles.response) ycols.push_back(parse_response(table, name, rows));
  const catfuse::ResponseMatrix Y(ycols);

  const auto grid = catfuse::default_lambda_grid();
  std::vector<std::vector<double>> cv_err;
  const auto params = catfuse::cross_validate(design, Y, grid, opt.gamma, opt.folds,
                                              catfuse::derive_seed(opt.seed, 11), true,
                                              fit_config_from(config), &cv_err);
  Json out;
  out["schema_version"] = catfuse::kReportSchemaVersion;
  out["kind"] = "cv";
  out["generated_at"] = catfuse::timestamp_utc();
  out["grid"] = grid;
  out["folds"] = opt.folds;
  out["seed"] = opt.seed;
  Json per_resp = Json::array();
  for (int l = 0; l < Y.q(); ++l) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
      if (cv_err[l][g] < cv_err[l][best]) best = g;
    Json entry;
    entry["response"] = roles.response[l];
    entry["selected_multiplier"] = grid[best];
    entry["mean_cv_error"] = cv_err[l];
    Json lam = Json::array();
    for (int j = 0; j < design.p(); ++j) lam.push_back(params.lambda[l][j]);
    entry["lambda"] = lam;
    per_resp.push_back(std::move(entry));
  }
  out["responses"] = per_resp;
  write_json_file(opt.output, out);
  std::cout << "wrote " << opt.output << "\n";
  return 0;
}

int cmd_simulate(const CliOptions& opt) {
  catfuse::ScenarioSpec spec;
  spec.n = opt.n;
  spec.p = opt.p;
  spec.K = opt.K;
  spec.sigma = opt.sigma;
  spec.rho = opt.rho;
  spec.scenario_id = opt.scenario;
  spec.replications = opt.replications;
  spec.base_seed = opt.seed;

  catfuse::StudyOptions options;
  options.cv_folds = opt.folds;
  options.gamma = opt.gamma;
  options.fixed_lambda = opt.lambda;
  options.max_rounds = opt.max_rounds;
  options.threads = opt.threads;

  const catfuse::StudyMode mode = catfuse::study_mode_from_string(opt.mode);
  const catfuse::MetricsReport report = catfuse::run_study(spec, mode, options);

  Json out;
  out["schema_version"] = catfuse::kReportSchemaVersion;
  out["kind"] = "simulation";
  out["generated_at"] = catfuse::timestamp_utc();
  out["spec"] = {{"n", spec.n},           {"p", spec.p},
                 {"K", spec.K},           {"sigma", spec.sigma},
                 {"rho", spec.rho},       {"scenario", spec.scenario_id},
                 {"replications", spec.replications}, {"base_seed", spec.base_seed}};
  out["mode"] = catfuse::to_string(mode);
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    rows.push_back(Json{{"replication", row.replication},
                        {"l2_error", row.l2_error},
                        {"mse", row.mse},
                        {"lambda_chosen", row.lambda_chosen},
                        {"runtime_seconds", row.runtime_seconds}});
  }
  out["replications"] = rows;
  out["aggregates"] = {{"mean_l2", report.mean_l2},
                       {"sd_l2", report.sd_l2},
                       {"mean_mse", report.mean_mse},
                       {"sd_mse", report.sd_mse}};
  write_json_file(opt.output, out);

  if (!opt.aggregate_csv.empty()) {
    std::vector<std::vector<std::string>> table_rows;
    for (std::size_t l = 0; l < report.mean_l2.size(); ++l) {
      auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
      };
      table_rows.push_back({catfuse::to_string(mode), std::to_string(spec.scenario_id),
                            fmt(spec.sigma), fmt(spec.rho), "response_" + std::to_string(l + 1),
                            fmt(report.mean_l2[l]), fmt(report.sd_l2[l]),
                            fmt(report.mean_mse[l]), fmt(report.sd_mse[l])});
    }
    catfuse::write_csv_file(opt.aggregate_csv,
                            {"mode", "scenario", "sigma", "rho", "response", "mean_l2", "sd_l2",
                             "mean_mse", "sd_mse"},
                            table_rows);
  }
  std::cout << "wrote " << opt.output << "\n";
  for (std::size_t l = 0; l < report.mean_l2.size(); ++l)
    std::cout << "response " << (l + 1) << ": mean l2 " << report.mean_l2[l] << " (sd "
              << report.sd_l2[l] << "), mean mse " << report.mean_mse[l] << " (sd "
              << report.sd_mse[l] << ")\n";
  return 0;
}

int cmd_diagnose(const CliOptions& opt) {
  const catfuse::CsvTable table = catfuse::read_csv_file(opt.input);
  const Json config = load_json_file(opt.config);
  const Roles roles = resolve_roles(config, table);

  std::vector<std::vector<std::string>> cat_columns;
  for (const auto& name : roles.categorical)
    cat_columns.push_back(table.column(table.col_index(name)));
  const catfuse::CategoricalDesign design = catfuse::ingest_design(cat_columns);

  const Json truth_json = load_json_file(opt.truth);
  if (!truth_json.contains("responses") || !truth_json["responses"].is_array())
    throw std::runtime_error("truth table: missing \"responses\" array");
  std::vector<catfuse::CoefficientFit> truth;
  for (const Json& resp : truth_json["responses"]) {
    catfuse::CoefficientFit fit;
    fit.blocks = resp.get<std::vector<std::vector<double>>>();
    if (static_cast<int>(fit.blocks.size()) != design.p())
      throw std::runtime_error("truth table: block count != number of predictors");
    truth.push_back(std::move(fit));
  }

  const int q = static_cast<int>(truth.size());
  const double multiplier = opt.lambda >= 0.0 ? opt.lambda : 1.0;
  catfuse::PenaltyParams params;
  params.lambda.assign(q, std::vector<double>(design.p(), 0.0));
  params.gamma.assign(q, std::vector<double>(design.p(), opt.gamma));
  for (int l = 0; l < q; ++l)
    for (int j = 0; j < design.p(); ++j)
      params.lambda[l][j] = multiplier * catfuse::lambda_scale(design, j);

  const catfuse::TheoryDiagnostics diag = catfuse::compute_diagnostics(design, truth, params);

  auto finite_or_null = [](double v) {
    return std::isfinite(v) ? Json(v) : Json(nullptr);
  };
  Json out;
  out["schema_version"] = catfuse::kReportSchemaVersion;
  out["kind"] = "diagnostics";
  out["generated_at"] = catfuse::timestamp_utc();
  out["eta_feasible"] = diag.eta_feasible;
  out["c_min"] = diag.c_min;
  Json per_j = Json::array();
  for (int j = 0; j < design.p(); ++j) {
    Json entry;
    entry["predictor"] = roles.categorical[j];
    entry["n_j_min"] = diag.n_j_min[j];
    entry["n_j_max"] = diag.n_j_max[j];
    entry["m_j_min"] = diag.m_j_min[j];
    entry["gamma_star"] = diag.gamma_star[j];
    entry["prob_exponent_literal"] = diag.prob_exponent_literal[j];
    entry["prob_exponent_conservative"] = diag.prob_exponent_conservative[j];
    entry["log_term"] = diag.log_term[j];
    per_j.push_back(std::move(entry));
  }
  out["predictors"] = per_j;
  Json per_lj = Json::array();
  for (int l = 0; l < q; ++l) {
    Json entry;
    entry["response"] = l + 1;
    entry["s"] = diag.s[l];
    Json deltas = Json::array();
    for (int j = 0; j < design.p(); ++j) deltas.push_back(finite_or_null(diag.delta[l][j]));
    entry["delta"] = deltas;
    Json sep = Json::array();
    for (int j = 0; j < design.p(); ++j) sep.push_back(bool(diag.separation_ok[l][j]));
    entry["separation_ok"] = sep;
    per_lj.push_back(std::move(entry));
  }
  out["responses"] = per_lj;
  write_json_file(opt.output, out);
  std::cout << "wrote " << opt.output << "\n";
  return 0;
}

int cmd_predict(const CliOptions& opt) {
  const Json report = load_json_file(opt.report);
  const catfuse::CsvTable table = catfuse::read_csv_file(opt.input);

  std::vector<std::vector<std::string>> columns(table.num_cols());
  for (int c = 0; c < table.num_cols(); ++c) columns[c] = table.column(c);
  const auto pred = catfuse::predict_from_report(report, table.header, columns);

  std::vector<bool> binary(pred.response_names.size(), false);
  if (report.contains("response_columns"))
    for (std::size_t l = 0; l < pred.response_names.size(); ++l)
      for (const Json& meta : report["response_columns"])
        if (meta["name"] == pred.response_names[l]) binary[l] = meta.value("binary", false);

  std::vector<std::string> header{"row"};
  for (std::size_t l = 0; l < pred.response_names.size(); ++l) {
    header.push_back("predicted_" + pred.response_names[l]);
    if (binary[l]) header.push_back("class_" + pred.response_names[l]);
  }
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < table.num_rows(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (std::size_t l = 0; l < pred.predictions.size(); ++l) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.12g", pred.predictions[l][i]);
      row.push_back(buf);
      if (binary[l]) row.push_back(pred.predictions[l][i] >= 0.5 ? "1" : "0");
    }
    rows.push_back(std::move(row));
  }
  catfuse::write_csv_file(opt.output, header, rows);
  if (pred.unseen_count > 0)
    std::cerr << "warning: " << pred.unseen_count
              << " cells had levels unseen at training time; predicted with coefficient 0\n";
  std::cout << "wrote " << opt.output << "\n";
  return 0;
}

void apply_config_defaults(const Json& config, CliOptions& opt, const CLI::App& cmd) {
  auto unset = [&](const std::string& flag) { return cmd.count(flag) == 0; };
  if (config.contains("lambda") && unset("--lambda")) opt.lambda = config["lambda"].get<double>();
  if (config.contains("gamma") && unset("--gamma")) opt.gamma = config["gamma"].get<double>();
  if (config.contains("folds") && unset("--folds")) opt.folds = config["folds"].get<int>();
  if (config.contains("mode") && unset("--mode")) opt.mode = config["mode"].get<std::string>();
  if (config.contains("seed") && unset("--seed"))
    opt.seed = config["seed"].get<std::uint64_t>();
  if (config.contains("max_rounds") && unset("--max-rounds"))
    opt.max_rounds = config["max_rounds"].get<int>();
  if (config.contains("test_fraction") && unset("--test-fraction"))
    opt.test_fraction = config["test_fraction"].get<double>();
  if (config.contains("split_by") && unset("--split-by"))
    opt.split_by = config["split_by"].get<std::string>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fused-category regression for multi-response models"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* fit = app.add_subcommand("fit", "fit a model to CSV data");
  fit->add_option("--input", opt.input, "input CSV (header required)")->required();
  fit->add_option("--config", opt.config, "JSON config with column roles")->required();
  fit->add_option("--output", opt.output, "output report path")->required();
  fit->add_option("--mode", opt.mode, "iterative or one-pass");
  fit->add_option("--lambda", opt.lambda, "fixed penalty multiplier (default: cross-validate)");
  fit->add_option("--gamma", opt.gamma, "MCP concavity parameter");
  fit->add_option("--folds", opt.folds, "cross-validation folds");
  fit->add_option("--seed", opt.seed, "seed for splits and folds");
  fit->add_option("--max-rounds", opt.max_rounds, "propagation round limit");
  fit->add_option("--split-by", opt.split_by, "fit each level of this column separately");
  fit->add_option("--test-fraction", opt.test_fraction, "held-out fraction for test metrics");
  fit->add_option("--coef-csv", opt.coef_csv, "also write coefficients as CSV");

  CLI::App* cv = app.add_subcommand("cv", "cross-validate the penalty level");
  cv->add_option("--input", opt.input)->required();
  cv->add_option("--config", opt.config)->required();
  cv->add_option("--output", opt.output)->required();
  cv->add_option("--gamma", opt.gamma);
  cv->add_option("--folds", opt.folds);
  cv->add_option("--seed", opt.seed);

  CLI::App* sim = app.add_subcommand("simulate", "run a replication study");
  sim->add_option("--scenario", opt.scenario, "1 (sparse) or 2 (less sparse)");
  sim->add_option("--sigma", opt.sigma, "noise standard deviation");
  sim->add_option("--rho", opt.rho, "predictor correlation");
  sim->add_option("--replications", opt.replications);
  sim->add_option("--seed", opt.seed);
  sim->add_option("--mode", opt.mode, "iterative, one-pass, univariate, or lasso");
  sim->add_option("--n", opt.n);
  sim->add_option("--p", opt.p);
  sim->add_option("--K", opt.K);
  sim->add_option("--lambda", opt.lambda, "fixed multiplier (default: cross-validate)");
  sim->add_option("--gamma", opt.gamma);
  sim->add_option("--folds", opt.folds);
  sim->add_option("--threads", opt.threads);
  sim->add_option("--max-rounds", opt.max_rounds);
  sim->add_option("--output", opt.output)->required();
  sim->add_option("--csv", opt.aggregate_csv, "also write the aggregate table as CSV");

  CLI::App* diag = app.add_subcommand("diagnose", "recovery diagnostics for a truth table");
  diag->add_option("--input", opt.input)->required();
  diag->add_option("--config", opt.config)->required();
  diag->add_option("--truth", opt.truth, "JSON truth coefficient table")->required();
  diag->add_option("--output", opt.output)->required();
  diag->add_option("--lambda", opt.lambda, "penalty multiplier to evaluate (default 1)");
  diag->add_option("--gamma", opt.gamma);

  CLI::App* pred = app.add_subcommand("predict", "apply a saved fit report to new CSV rows");
  pred->add_option("--report", opt.report, "fit report JSON")->required();
  pred->add_option("--input", opt.input)->required();
  pred->add_option("--output", opt.output, "predictions CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      if (!opt.config.empty()) apply_config_defaults(load_json_file(opt.config), opt, *fit);
      return cmd_fit(opt);
    }
    if (cv->parsed()) {
      apply_config_defaults(load_json_file(opt.config), opt, *cv);
      return cmd_cv(opt);
    }
    if (sim->parsed()) return cmd_simulate(opt);
    if (diag->parsed()) {
      apply_config_defaults(load_json_file(opt.config), opt, *diag);
      return cmd_diagnose(opt);
    }
    if (pred->parsed()) return cmd_predict(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

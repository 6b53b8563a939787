#include "catfuse/report.hpp"

#include <chrono>
#include <ctime>
#include <map>
#include <sstream>
#include <stdexcept>

namespace catfuse {

namespace {

std::vector<int> group_ids_for_block(const std::vector<double>& block) {
  // Ids ordered by ascending shared value.
  std::map<double, int> id_of;
  for (double v : block) id_of.emplace(v, 0);
  int next = 0;
  for (auto& [value, id] : id_of) id = next++;
  std::vector<int> out;
  out.reserve(block.size());
  for (double v : block) out.push_back(id_of[v]);
  return out;
}

}  // namespace

Json fit_report_responses(const CategoricalDesign& d,
                          const std::vector<std::string>& predictor_names,
                          const std::vector<std::string>& response_names,
                          const MultiFit& fit) {
  Json responses = Json::array();
  for (std::size_t l = 0; l < fit.fits.size(); ++l) {
    const CoefficientFit& cf = fit.fits[l];
    Json entry;
    entry["name"] = response_names.at(l);
    entry["intercept"] = cf.intercept;
    entry["converged"] = cf.converged;
    entry["sweeps"] = cf.sweeps_used;

    Json active = Json::array();
    const ActiveSet active_set = update_active_set(cf);
    for (int j : active_set.members()) active.push_back(predictor_names.at(j));
    entry["active_predictors"] = active;

    Json blocks;
    for (int j = 0; j < d.p(); ++j) {
      Json blk;
      blk["levels"] = d.level_labels(j);
      blk["coefficients"] = cf.blocks[j];
      blk["group_ids"] = group_ids_for_block(cf.blocks[j]);
      blocks[predictor_names.at(j)] = std::move(blk);
    }
    entry["coefficients"] = std::move(blocks);
    responses.push_back(std::move(entry));
  }
  return responses;
}

Json active_history_json(const std::vector<std::string>& predictor_names, const MultiFit& fit) {
  Json hist = Json::array();
  for (const auto& [l, set] : fit.active_history) {
    Json entry;
    entry["response"] = l;
    Json members = Json::array();
    for (int j : set.members()) members.push_back(predictor_names.at(j));
    entry["active"] = members;
    hist.push_back(std::move(entry));
  }
  return hist;
}

ReportPrediction predict_from_report(const Json& report,
                                     const std::vector<std::string>& header,
                                     const std::vector<std::vector<std::string>>& columns) {
  if (!report.contains("schema_version") || !report["schema_version"].is_number_integer())
    throw std::runtime_error("report: missing schema_version");
  const int version = report["schema_version"].get<int>();
  if (version > kReportSchemaVersion) {
    std::ostringstream msg;
    msg << "report: schema version " << version << " is newer than supported version "
        << kReportSchemaVersion;
    throw std::runtime_error(msg.str());
  }
  if (!report.contains("responses")) throw std::runtime_error("report: missing responses");

  const std::size_t nrows = columns.empty() ? 0 : columns[0].size();
  ReportPrediction out;
  for (const Json& resp : report["responses"]) {
    std::vector<double> pred(nrows, resp["intercept"].get<double>());
    for (const auto& [pred_name, blk] : resp["coefficients"].items()) {
      int col = -1;
      for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == pred_name) {
          col = static_cast<int>(c);
          break;
        }
      if (col < 0)
        throw std::runtime_error("report: predictor column missing from input: " + pred_name);
      std::map<std::string, double> coef;
      const auto& labels = blk["levels"];
      const auto& values = blk["coefficients"];
      for (std::size_t k = 0; k < labels.size(); ++k)
        coef[labels[k].get<std::string>()] = values[k].get<double>();
      for (std::size_t i = 0; i < nrows; ++i) {
        const auto it = coef.find(columns[col][i]);
        if (it == coef.end())
          ++out.unseen_count;
        else
          pred[i] += it->second;
      }
    }
    out.predictions.push_back(std::move(pred));
    out.response_names.push_back(resp["name"].get<std::string>());
  }
  return out;
}

namespace {

void strip_volatile(Json& j) {
  if (j.is_object()) {
    j.erase("generated_at");
    j.erase("runtime_seconds");
    j.erase("runtime");
    for (auto& [key, value] : j.items()) strip_volatile(value);
  } else if (j.is_array()) {
    for (auto& v : j) strip_volatile(v);
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  Json copy = j;
  strip_volatile(copy);
  return copy.dump(2);
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::vector<std::string>> coefficient_csv_rows(
    const CategoricalDesign& d, const std::vector<std::string>& predictor_names,
    const std::vector<std::string>& response_names, const MultiFit& fit) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t l = 0; l < fit.fits.size(); ++l) {
    for (int j = 0; j < d.p(); ++j) {
      const auto ids = group_ids_for_block(fit.fits[l].blocks[j]);
      for (int k = 0; k < d.num_levels(j); ++k) {
        std::ostringstream coef;
        coef.precision(17);
        coef << fit.fits[l].blocks[j][k];
        rows.push_back({d.level_labels(j)[k], predictor_names.at(j), response_names.at(l),
                        coef.str(), std::to_string(ids[k])});
      }
    }
  }
  return rows;
}

}  // namespace catfuse

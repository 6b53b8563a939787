#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "catfuse/design.hpp"
#include "catfuse/model.hpp"
#include "catfuse/multi_response.hpp"

namespace catfuse {

inline constexpr int kReportSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// Per-response coefficient section of a fit report: intercept, per-level
/// coefficients keyed by original labels, fused-group ids, active predictors.
Json fit_report_responses(const CategoricalDesign& d,
                          const std::vector<std::string>& predictor_names,
                          const std::vector<std::string>& response_names,
                          const MultiFit& fit);

Json active_history_json(const std::vector<std::string>& predictor_names,
                         const MultiFit& fit);

/// Applies a fit report's coefficients to new categorical columns. Levels
/// absent from the report predict through coefficient 0; unseen_count tallies
/// those cells. Throws if the report's schema version is newer than this
/// build understands or if a predictor column is missing.
struct ReportPrediction {
  std::vector<std::vector<double>> predictions;  // per response
  std::vector<std::string> response_names;
  long unseen_count = 0;
};
ReportPrediction predict_from_report(const Json& report,
                                     const std::vector<std::string>& header,
                                     const std::vector<std::vector<std::string>>& columns);

/// Serialization with volatile fields (timestamps, runtimes) removed; two
/// runs with the same seed and config must agree on this form.
std::string canonical_dump(const Json& j);

/// RFC 3339 UTC timestamp.
std::string timestamp_utc();

/// CSV rows (level,predictor,response,coefficient,group_id) for a fit.
std::vector<std::vector<std::string>> coefficient_csv_rows(
    const CategoricalDesign& d, const std::vector<std::string>& predictor_names,
    const std::vector<std::string>& response_names, const MultiFit& fit);

}  // namespace catfuse

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "handqc/evaluation.hpp"

namespace handqc {

nlohmann::json to_json(const EvalReport& report);
/// Throws ParseError when a required field is missing or mistyped.
EvalReport report_from_json(const nlohmann::json& j);

/// One header line and one row, laid out like a results table:
/// model, P, R, F1, mAP@0.5, mAP@0.5:0.95, then one AP@0.5:0.95 column per class.
std::string report_csv(const EvalReport& report, const std::string& model_name);

/// Fixed-point rendering used for every metric column (3 decimals by default).
std::string format_metric(double value, int decimals = 3);

/// `metric,baseline,other,dropped` CSV with metrics at 3 decimals.
std::string delta_csv(const std::vector<DeltaRow>& rows);
/// Aligned plain-text rendering for the terminal.
std::string delta_table(const std::vector<DeltaRow>& rows);

}  // namespace handqc

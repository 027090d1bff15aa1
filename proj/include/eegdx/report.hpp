#pragma once

#include <string>

#include "eegdx/eval.hpp"

#include "json.hpp"

namespace eegdx::report {

// JSON <-> config glue used by report and model files.
nlohmann::json config_to_json(const features::ExtractionConfig& config);
features::ExtractionConfig config_from_json(const nlohmann::json& j);

// Machine-readable evaluation report. Raw confusion counts are stored so
// every derived rate can be recomputed.
nlohmann::json report_to_json(const eval::EvalReport& report);

// Human-readable report: configuration header, per-channel accuracy table,
// voted metrics with the confusion counts.
std::string render_report_text(const eval::EvalReport& report);

nlohmann::json study_to_json(const eval::FeatureStudyResult& study, double spread);

// Channels as rows, feature combinations as columns, per-selection means
// and the winning column at the bottom.
std::string render_study_table(const eval::FeatureStudyResult& study);

nlohmann::json sweep_to_json(const eval::SweepResult& sweep, double spread,
                             ensemble::TiePolicy tie_policy,
                             const features::FeatureSelection& selection);

// Matrix view (segment length x cutoff rows, band columns) followed by the
// accuracy ranking and any per-configuration failures.
std::string render_sweep_table(const eval::SweepResult& sweep);

}  // namespace eegdx::report

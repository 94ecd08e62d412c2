#pragma once

#include "tsattack/experiment.hpp"

#include <filesystem>
#include <string>

namespace tsattack {

inline constexpr const char* kRecordsHeader =
    "series_id,delta,scenario,j_orig,j_adv,max_u_orig,max_u_adv,l1_orig,l1_adv,norm_used,flags";

std::string tool_version();

/// records.csv text; flags are joined with '|'.
std::string records_csv(const std::vector<SeriesRecord>& records);

/// Writes records.csv, summary.json and one series_<scenario>.csv per
/// scenario under out_dir (created if needed). Throws IoError with the path.
void emit_report(const ScenarioStats& stats, const ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir);

}  // namespace tsattack

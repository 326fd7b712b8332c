#pragma once

#include "infraqa/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace infraqa {

/// `setup,machine,mAP,A_sld,HOTA,A_norm,L_norm,R_norm,Q_mag`, one row per result.
std::string report_csv(const std::vector<SetupResult>& results);
/// `setup,machine,A_norm,L_norm,R_norm`, one row per result.
std::string qspace_csv(const std::vector<SetupResult>& results);
/// Full breakdowns, floats rounded to 9 significant digits.
std::string report_json(const std::vector<SetupResult>& results);

/// Writes report.csv, report.json and qspace.csv into out_dir (created if
/// needed), each atomically. Throws ValidationError on empty results and
/// IoError when the directory is unwritable.
void write_report(const std::vector<SetupResult>& results, const std::filesystem::path& out_dir);

/// Inverse of report_json.
std::vector<SetupResult> parse_report_json(const std::string& text);
std::vector<SetupResult> read_report_json(const std::filesystem::path& path);

}  // namespace infraqa

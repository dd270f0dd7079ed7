#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "horserace/app/config.hpp"
#include "horserace/app/preprocess.hpp"
#include "horserace/evaluation.hpp"

namespace horserace::app {

/// Everything needed to re-emit the report files of a run.
struct RunRecord {
  RunConfig config;
  std::vector<std::string> dropped_dates;
  PreprocessLog preprocess;
  HorseRaceReport report;
};

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& text);
RunRecord load_record(const std::filesystem::path& path);

/// Writes report.json, delta_ic.csv, mode_votes.csv, predictability.csv,
/// diagnostics_<covariate>.csv, qq_<covariate>_<R>.csv,
/// acf_pacf_<covariate>_<R>.csv and run_manifest.json. Returns the file names
/// in the order written.
std::vector<std::string> emit_report(const RunRecord& record, const std::filesystem::path& out_dir);

/// Covariates and window lengths that get plot-data files.
std::vector<std::string> plot_covariates(const RunRecord& record);
std::vector<int> plot_windows(const RunRecord& record);

/// Name made safe for use inside a file name.
std::string file_stem(const std::string& name);

}  // namespace horserace::app

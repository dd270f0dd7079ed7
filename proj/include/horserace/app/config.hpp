#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "horserace/diagnostics.hpp"
#include "horserace/evaluation.hpp"

namespace horserace::app {

/// Every knob of a run. A config file sets any subset of these fields (same
/// names, JSON); command-line flags override the file.
struct RunConfig {
  std::string target_path;
  std::string covariates_path;

  /// Ascending estimation window lengths; the default is 310, 320, ..., 620.
  std::vector<int> window_grid;
  /// Only one-step-ahead forecasts are supported.
  int horizon = 1;
  int max_p = 5;
  int max_q = 5;
  int max_order = 5;
  /// 0 disables seasonal differencing.
  int seasonal_period = 7;
  bool approximate_search = true;
  double alpha_gate = 0.01;
  double alpha_report = 0.05;
  std::uint64_t seed = 42;
  int covariate_lag = 1;
  int jobs = 1;

  bool log_gate = true;
  BreuschPaganInput bp_input = BreuschPaganInput::differences;
  double nzv_freq_ratio = 19.0;
  double nzv_unique_pct = 10.0;

  /// Share of skipped windows above which `run` exits with status 2.
  double skip_budget = 0.02;
  /// Covariates and window lengths that get Q-Q and correlogram files.
  /// Empty means: the two best covariates by MSFE vote; first, middle and last R.
  std::vector<std::string> plot_covariates;
  std::vector<int> plot_windows;
  std::size_t acf_lags = 20;
};

/// "310:620:10" -> {310, 320, ..., 620}; a comma list "310,400" is also accepted.
std::vector<int> parse_window_spec(std::string_view spec);
std::vector<int> default_window_grid();

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

/// Structural checks; `T` (when nonzero) bounds the window grid.
void validate_config(const RunConfig& config, std::size_t T = 0);

EvaluationConfig to_evaluation_config(const RunConfig& config);

}  // namespace horserace::app

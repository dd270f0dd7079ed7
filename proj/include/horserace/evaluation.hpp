#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "horserace/arima.hpp"
#include "horserace/diagnostics.hpp"
#include "horserace/series.hpp"

namespace horserace {

/// Reserved name of the resampled noise covariate.
inline const std::string kNoiseCovariate = "Rand";

struct EvaluationConfig {
  /// Estimation window lengths R, ascending.
  std::vector<int> window_grid;
  /// The regressor for date t is the covariate observed at t - covariate_lag.
  int covariate_lag = 1;
  AutoArimaConfig arima;
  /// Gate settings; `seed` and `fitted_params` are filled per window.
  BatteryConfig battery;
  std::uint64_t seed = 42;
  int jobs = 1;
};

struct WindowResult {
  /// Empty for the random-walk arm.
  std::string covariate_name;
  int R = 0;
  /// 0-based index of the last in-sample observation.
  int origin_index = 0;
  double forecast = 0.0;
  double actual = 0.0;
  double rw_forecast = 0.0;
  bool skipped = false;
  std::string skip_reason;
  double aic = 0.0;
  double bic = 0.0;
  ArimaOrder order;
  DiagnosticBattery battery;
};

/// Fixed-window rolling-origin evaluation for origins R-1 .. T-2. An empty
/// `covariate_name` runs the random-walk arm, whose diagnostics are recorded
/// but never gate; `kNoiseCovariate` is drawn from the panel when the panel
/// does not carry it.
std::vector<WindowResult> rolling_cv(const Panel& panel, const std::string& covariate_name, int R,
                                     const EvaluationConfig& config);

double msfe(std::span<const double> forecasts, std::span<const double> actuals);
double mae(std::span<const double> forecasts, std::span<const double> actuals);

using ScoreTable = std::vector<std::vector<double>>;

/// Subtracts the global minimum from every entry.
ScoreTable delta_scale(const ScoreTable& table);

/// Draws T values with replacement from the pooled values of every covariate
/// except an existing noise covariate.
TimeSeries make_noise_covariate(const Panel& panel, std::uint64_t seed);

/// Mean of per-split MSFE differences (model minus random walk).
double avg_predictability(std::span<const double> per_split_delta_msfe);

/// Predictability rank minus frequency rank per covariate; negative values
/// mark covariates that predict better than their frequency suggests.
std::map<std::string, int> rank_difference(const std::map<std::string, int>& frequency_ranks,
                                           const std::map<std::string, int>& predictability_ranks);

struct SkipRecord {
  int origin_index = 0;
  std::string reason;
};

struct SplitSummary {
  std::string covariate_name;
  int R = 0;
  int P_attempted = 0;
  int P_effective = 0;
  /// NaN when every window was skipped.
  double msfe = 0.0;
  double mae = 0.0;
  double rw_msfe = 0.0;
  double rw_mae = 0.0;
  double mean_aic = 0.0;
  double mean_bic = 0.0;
  bool outperformed_rw = false;
  bool outperformed_rw_and_rand = false;
  /// actual - forecast over non-skipped windows, in origin order.
  std::vector<double> forecast_errors;
  std::vector<SkipRecord> skips;

  bool is_void() const { return P_effective == 0; }
  double skip_rate() const {
    return P_attempted > 0 ? static_cast<double>(P_attempted - P_effective) / P_attempted : 0.0;
  }
};

SplitSummary summarize_split(std::span<const WindowResult> windows, const std::string& covariate_name,
                             int R);

enum class Metric { msfe, mae };

/// Rows are covariates (including the noise covariate), columns are splits
/// in window-grid order.
struct SplitGrid {
  std::vector<int> windows;
  std::vector<std::string> covariates;
  std::vector<std::vector<SplitSummary>> cells;
};

struct ModeVotes {
  std::map<std::string, int> by_covariate;
  std::map<int, int> by_window;
};

/// A covariate scores in a split when its metric is strictly below both the
/// random walk's and the noise covariate's. The noise covariate itself is
/// scored against the random walk only. By-window counts exclude the noise
/// covariate.
ModeVotes mode_vote(const SplitGrid& grid, Metric metric);

struct HorseRaceReport {
  std::size_t T = 0;
  std::uint64_t seed = 0;
  SplitGrid grid;
  /// Random-walk arm per split.
  std::vector<SplitSummary> rw_arm;

  /// Information criteria averaged over windows and splits.
  std::vector<double> mean_aic;
  std::vector<double> mean_bic;
  double rw_mean_aic = 0.0;
  double rw_mean_bic = 0.0;
  /// Rows follow grid.covariates; columns are {random walk, regARIMA}.
  ScoreTable delta_aic;
  ScoreTable delta_bic;
  std::vector<int> bic_rank;

  /// Split-averaged MSFE difference per covariate (NaN when void).
  std::vector<double> delta_msfe;
  std::map<std::string, int> predictability_rank;
  std::map<std::string, int> frequency_rank;
  std::map<std::string, int> rank_difference;

  ModeVotes votes_msfe;
  ModeVotes votes_mae;

  std::size_t windows_attempted() const;
  std::size_t windows_skipped() const;
};

/// Runs every covariate, the noise covariate and the random-walk arm across
/// the window grid.
HorseRaceReport run_horse_race(const Panel& panel, const EvaluationConfig& config);

/// Seed for one estimation window, stable across scheduling.
std::uint64_t window_seed(std::uint64_t run_seed, const std::string& covariate, int R, int origin);

}  // namespace horserace

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "horserace/series.hpp"

namespace horserace {

struct TestResult {
  std::string test_name;
  double statistic = 0.0;
  /// Always within [0, 1].
  double p_value = 1.0;
  /// Lag count or degrees of freedom, depending on the test.
  int lags_or_df = 0;
};

/// Portmanteau Q = n(n+2) sum r_l^2/(n-l); chi-square with
/// max(1, n_lags - fitted_params) degrees of freedom.
TestResult ljung_box(std::span<const double> residuals, std::size_t n_lags, int fitted_params = 0);

enum class KpssBandwidth {
  /// trunc(4 (n/100)^(1/4)) lags.
  short_rule,
  /// Newey-West (1994) data-dependent bandwidth.
  newey_west,
};

/// KPSS level-stationarity test with a Bartlett-kernel long-run variance.
/// The p-value is interpolated in the published table and clamped to
/// [0.01, 0.10].
TestResult kpss(std::span<const double> series, KpssBandwidth bandwidth = KpssBandwidth::short_rule);

enum class AdfLagPolicy {
  /// trunc((n-1)^(1/3)) lagged differences.
  fixed,
  /// AIC choice among 0..trunc((n-1)^(1/3)) on a common sample.
  aic,
};

/// Augmented Dickey-Fuller tau test with a constant. p interpolated in the
/// Dickey-Fuller tables and clamped to [0.01, 0.99].
TestResult adf(std::span<const double> series, AdfLagPolicy lag_policy = AdfLagPolicy::fixed);

/// Phillips-Perron Z(tau) with a constant and Bartlett weights,
/// l = trunc(4 (n/100)^(1/4)). Same tables as adf.
TestResult phillips_perron(std::span<const double> series);

/// Lee-White-Granger neural-network test for neglected nonlinearity in the
/// mean, with one lag of the series as input. Projection weights are drawn
/// uniformly on [-2, 2] from `seed`.
TestResult white_nn_test(std::span<const double> series, int n_hidden = 2, std::uint64_t seed = 0);

enum class BreuschPaganInput {
  /// Residuals of a linear time-trend fit of the series itself.
  levels,
  /// Residuals of a linear time-trend fit of the first differences.
  differences,
};

/// Studentized (Koenker) Breusch-Pagan LM test of squared residuals on a time trend.
TestResult breusch_pagan(std::span<const double> series,
                         BreuschPaganInput input = BreuschPaganInput::levels);
TestResult breusch_pagan(const TimeSeries& target,
                         BreuschPaganInput input = BreuschPaganInput::levels);

/// VIF_j = 1/(1 - R^2_j). Perfect collinearity yields +infinity.
std::vector<double> vif(std::span<const TimeSeries> covariates);

/// min(1, m p) for each raw p-value.
std::vector<double> bonferroni_adjust(std::span<const double> p_values, int m);

struct QQData {
  std::vector<double> sample_quantiles;
  std::vector<double> theoretical_quantiles;
  std::vector<double> band_lower;
  std::vector<double> band_upper;
};

/// Normal Q-Q data at plotting positions (i - 0.5)/n with 95% pointwise
/// bands from the normal approximation to the order statistics, on the scale
/// of the sample mean and standard deviation.
QQData qq_data(std::span<const double> residuals);

struct BatteryConfig {
  double alpha_gate = 0.01;
  bool gate_ljung_box = true;
  bool gate_adf = true;
  bool gate_phillips_perron = true;
  bool gate_kpss = false;
  bool gate_white = false;
  std::size_t max_lb_lags = 10;
  /// ARMA parameters of the model that produced the residuals.
  int fitted_params = 0;
  int white_hidden = 2;
  std::uint64_t seed = 0;
  AdfLagPolicy adf_lags = AdfLagPolicy::fixed;
};

struct DiagnosticBattery {
  TestResult ljung_box;
  TestResult kpss;
  TestResult adf;
  TestResult phillips_perron;
  TestResult white_nn;
  bool anomaly = false;
  std::string anomaly_reason;
};

DiagnosticBattery run_battery(std::span<const double> residuals, const BatteryConfig& config = {});

/// Default Ljung-Box lag count: min(max_lags, n / 5), at least 1.
std::size_t default_lb_lags(std::size_t n, std::size_t max_lags = 10);

}  // namespace horserace

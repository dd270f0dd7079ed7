#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "horserace/series.hpp"

namespace horserace {

/// (p,d,q)(P,D,Q)_s orders plus the constant term. The constant is an
/// intercept when d + D = 0 and a drift when d + D = 1; it is never allowed
/// for higher total differencing.
struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
  int seasonal_period = 0;
  int P = 0;
  int D = 0;
  int Q = 0;
  bool include_mean = false;

  int arma_count() const { return p + q + P + Q; }
  int total_differencing() const { return d + D; }
  std::string to_string() const;
  bool operator==(const ArimaOrder&) const = default;
};

enum class Estimator { exact_ml, css };

struct FitOptions {
  Estimator method = Estimator::exact_ml;
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  /// Relative objective change that ends the search.
  double function_tolerance = 1e-12;
  /// Upper bound on p + q + P + Q.
  int max_order = 10;
  /// Starting ARMA coefficients laid out as [ar | ma | sar | sma]; zeros when absent.
  std::optional<std::vector<double>> initial_arma;
};

/// Estimated random-walk, ARIMA or regression-with-ARIMA-errors model.
/// Coefficients follow (1 - sum ar_i B^i)(1-B)^d (y_t - mean - sum beta_j x_jt)
/// = (1 + sum ma_i B^i) e_t, with seasonal factors multiplied in.
struct FittedModel {
  ArimaOrder order;
  std::vector<double> ar_coeffs;
  std::vector<double> ma_coeffs;
  std::vector<double> seasonal_ar_coeffs;
  std::vector<double> seasonal_ma_coeffs;
  std::vector<double> reg_coeffs;
  std::vector<std::string> covariate_names;
  std::optional<double> intercept;

  double sigma2 = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  double aicc = 0.0;
  double bic = 0.0;
  int n_params = 0;
  std::size_t n_eff = 0;
  /// One-step innovations on the differenced scale, scaled to variance sigma2.
  TimeSeries residuals;

  Estimator method = Estimator::exact_ml;
  bool random_walk = false;
  /// sigma2 == 0: the data carry no stochastic variation.
  bool degenerate = false;
  /// A coefficient is pinned against the stationarity/invertibility boundary.
  bool boundary_warning = false;
  /// Smallest modulus over all AR and MA polynomial roots (infinity if none).
  double min_root_modulus = 0.0;
  int iterations = 0;

  // Forecasting state captured at the end of the estimation sample.
  Date end_date;
  double next_error = 0.0;
  std::vector<double> target_tail;
  std::vector<std::vector<double>> regressor_tail;
};

struct Forecast {
  double point = 0.0;
  int horizon = 1;
  Date origin_date;
};

/// Random walk without drift: residuals are first differences.
FittedModel fit_random_walk(const TimeSeries& series);

FittedModel fit_arima(const TimeSeries& series, const ArimaOrder& order,
                      const FitOptions& options = {});

/// Joint maximum likelihood for the regression coefficients and ARMA errors;
/// target and covariates are differenced with the model's d and D.
FittedModel fit_regarima(const TimeSeries& target, std::span<const TimeSeries> covariates,
                         const ArimaOrder& order, const FitOptions& options = {});

/// Point forecast for the day after `history.end()` on the original scale.
/// `covariate_next` holds each covariate's regressor value at the forecast date.
Forecast forecast_one_step(const FittedModel& model, const TimeSeries& history,
                           std::span<const double> covariate_next = {});

struct AutoArimaConfig {
  int max_p = 5;
  int max_q = 5;
  int max_P = 2;
  int max_Q = 2;
  int max_order = 5;
  int max_d = 2;
  int max_D = 1;
  /// 0 disables seasonal handling.
  int seasonal_period = 7;
  double seasonal_strength_threshold = 0.64;
  double kpss_alpha = 0.05;
  bool allow_mean = true;
  /// Compare candidates by conditional sum of squares, refit the winner by exact ML.
  bool approximate = true;
  int max_models = 94;
  /// Relative objective tolerance while comparing candidates.
  double search_tolerance = 1e-8;
  /// Candidates with an AR or MA root inside this modulus are rejected.
  double min_root_modulus = 1.01;
};

/// Stepwise AICc search. d comes from repeated KPSS tests on the (regression)
/// residuals, D from the seasonal-strength heuristic.
ArimaOrder auto_select_order(const TimeSeries& target, std::span<const TimeSeries> covariates,
                             const AutoArimaConfig& config = {});

/// Seasonal strength max(0, 1 - var(remainder)/var(seasonal + remainder)) from
/// a classical moving-average decomposition.
double seasonal_strength(std::span<const double> values, int period);

/// Roots of 1 + c_1 z + ... + c_n z^n, returned as moduli.
std::vector<double> polynomial_root_moduli(std::span<const double> coeffs);

}  // namespace horserace

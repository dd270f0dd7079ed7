#pragma once

#include <cstdint>
#include <string>

#include "horserace/series.hpp"

namespace horserace::app {

/// Synthetic panel: y_t = y_{t-1} + beta x_{t-1} + e_t with x an AR(1)
/// covariate, plus optional independent noise covariates of the same kind.
struct SimSpec {
  std::size_t T = 636;
  double beta = 0.8;
  double innovation_sd = 0.005;
  /// Innovation sd grows linearly to (1 + heteroscedasticity) times its start.
  double heteroscedasticity = 0.0;
  double start_level = 1.3;

  double covariate_phi = 0.0;
  /// Innovation sd of x; ignored when `signal_share` is positive.
  double covariate_sd = 1.0;
  /// When positive, x is scaled so beta x_{t-1} explains this share of the
  /// variance of y_t - y_{t-1}.
  double signal_share = 0.0;
  double covariate_mean = 0.0;
  int noise_covariates = 0;

  std::string target_name = "value";
  std::string covariate_name = "signal";
  std::string start_date = "2012-01-01";
  std::uint64_t seed = 1;
};

/// Innovation sd of an AR(1) covariate that gives `share` of the variance of
/// the target's increments.
double covariate_sd_for_share(double beta, double innovation_sd, double phi, double share);

Panel simulate_panel(const SimSpec& spec);

}  // namespace horserace::app

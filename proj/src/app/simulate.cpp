#include "horserace/app/simulate.hpp"

#include <cmath>

#include "horserace/errors.hpp"
#include "horserace/random.hpp"

namespace horserace::app {

double covariate_sd_for_share(double beta, double innovation_sd, double phi, double share) {
  if (!(share > 0.0 && share < 1.0) || beta == 0.0 || std::abs(phi) >= 1.0) {
    throw ConfigError("signal share needs 0 < share < 1, beta != 0 and |phi| < 1");
  }
  // beta^2 var(x) / (beta^2 var(x) + sd^2) = share, var(x) = s^2 / (1 - phi^2).
  const double var_x = share / (1.0 - share) * innovation_sd * innovation_sd / (beta * beta);
  return std::sqrt(var_x * (1.0 - phi * phi));
}

namespace {

std::vector<double> ar1(Rng& rng, std::size_t n, double phi, double sd, double mean) {
  std::vector<double> x(n);
  // Start from the stationary distribution.
  double state = rng.normal(0.0, sd / std::sqrt(1.0 - phi * phi));
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      state = phi * state + rng.normal(0.0, sd);
    }
    x[t] = mean + state;
  }
  return x;
}

}  // namespace

Panel simulate_panel(const SimSpec& spec) {
  if (spec.T < 50) {
    throw ConfigError("simulated panels need T >= 50");
  }
  if (!(spec.innovation_sd > 0.0)) {
    throw ConfigError("innovation_sd must be positive");
  }
  if (std::abs(spec.covariate_phi) >= 1.0) {
    throw ConfigError("covariate_phi must lie in (-1, 1)");
  }
  if (spec.heteroscedasticity < 0.0 || spec.noise_covariates < 0) {
    throw ConfigError("heteroscedasticity and noise_covariates must be non-negative");
  }
  const double x_sd = spec.signal_share > 0.0
                          ? covariate_sd_for_share(spec.beta, spec.innovation_sd, spec.covariate_phi,
                                                   spec.signal_share)
                          : spec.covariate_sd;
  if (!(x_sd > 0.0)) {
    throw ConfigError("covariate_sd must be positive");
  }
  const Date start = Date::parse(spec.start_date);
  Rng rng(mix64(spec.seed));
  const auto x = ar1(rng, spec.T, spec.covariate_phi, x_sd, spec.covariate_mean);
  std::vector<double> y(spec.T);
  y[0] = spec.start_level;
  for (std::size_t t = 1; t < spec.T; ++t) {
    const double scale = 1.0 + spec.heteroscedasticity * static_cast<double>(t) / (spec.T - 1);
    y[t] = y[t - 1] + spec.beta * (x[t - 1] - spec.covariate_mean) + rng.normal(0.0, spec.innovation_sd * scale);
  }
  std::vector<TimeSeries> covariates{TimeSeries(spec.covariate_name, start, x)};
  for (int k = 0; k < spec.noise_covariates; ++k) {
    covariates.emplace_back("noise" + std::to_string(k + 1), start,
                            ar1(rng, spec.T, spec.covariate_phi, x_sd, spec.covariate_mean));
  }
  return Panel(TimeSeries(spec.target_name, start, std::move(y)), std::move(covariates));
}

}  // namespace horserace::app

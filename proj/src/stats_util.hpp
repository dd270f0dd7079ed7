#pragma once

// Internal numerical helpers shared by the estimation and diagnostics code.

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace horserace::detail {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double ssr = 0.0;
  /// Residual standard errors of beta (divisor n - k).
  Eigen::VectorXd std_errors;
  int rank = 0;
};

/// Least squares by column-pivoted QR. Rank-deficient designs report rank < cols.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool with_std_errors = false);

/// Uncentered-safe R^2 of an OLS fit that includes an intercept column.
double r_squared(const Eigen::VectorXd& y, const OlsFit& fit);

double chi2_sf(double statistic, double df);
double normal_cdf(double x);
double normal_quantile(double p);
double normal_pdf(double x);

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v);

}  // namespace horserace::detail

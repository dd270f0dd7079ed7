#include "stats_util.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

namespace horserace::detail {

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool with_std_errors) {
  OlsFit fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  fit.rank = static_cast<int>(qr.rank());
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  fit.ssr = fit.residuals.squaredNorm();
  if (with_std_errors && fit.rank == X.cols() && X.rows() > X.cols()) {
    const double s2 = fit.ssr / static_cast<double>(X.rows() - X.cols());
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    fit.std_errors = (s2 * xtx_inv.diagonal()).cwiseSqrt();
  }
  return fit;
}

double r_squared(const Eigen::VectorXd& y, const OlsFit& fit) {
  const double m = y.mean();
  const double tss = (y.array() - m).square().sum();
  if (!(tss > 0.0)) {
    return 0.0;
  }
  return 1.0 - fit.ssr / tss;
}

double chi2_sf(double statistic, double df) {
  if (!(statistic > 0.0)) {
    return 1.0;
  }
  if (!std::isfinite(statistic)) {
    return 0.0;
  }
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  static const boost::math::normal standard;
  return boost::math::quantile(standard, p);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace horserace::detail

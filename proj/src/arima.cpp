#include "horserace/arima.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "horserace/errors.hpp"
#include "horserace/optim.hpp"
#include "stats_util.hpp"

namespace horserace {

std::string ArimaOrder::to_string() const {
  std::ostringstream out;
  out << "ARIMA(" << p << ',' << d << ',' << q << ')';
  if (seasonal_period > 0 && (P + D + Q) > 0) {
    out << '(' << P << ',' << D << ',' << Q << ")[" << seasonal_period << ']';
  }
  if (include_mean) {
    out << (total_differencing() == 0 ? " with mean" : " with drift");
  }
  return out.str();
}

std::vector<double> polynomial_root_moduli(std::span<const double> coeffs) {
  std::size_t n = coeffs.size();
  while (n > 0 && coeffs[n - 1] == 0.0) {
    --n;
  }
  if (n == 0) {
    return {};
  }
  // Roots of 1 + c_1 z + ... + c_n z^n are reciprocals of the eigenvalues of
  // the companion matrix of z^n + c_1 z^{n-1} + ... + c_n.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    companion(0, static_cast<Eigen::Index>(j)) = -coeffs[j];
  }
  for (std::size_t i = 1; i < n; ++i) {
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  }
  const Eigen::VectorXcd eig = companion.eigenvalues();
  std::vector<double> moduli;
  moduli.reserve(n);
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const double m = std::abs(eig(i));
    moduli.push_back(m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity());
  }
  return moduli;
}

namespace {

/// z_t = sum phi_i z_{t-i} + e_t + sum theta_j e_{t-j}
struct ArmaPolynomials {
  std::vector<double> phi;
  std::vector<double> theta;
};

struct ArmaCoefficients {
  std::vector<double> ar;
  std::vector<double> ma;
  std::vector<double> sar;
  std::vector<double> sma;
};

/// Maps unconstrained values to the coefficients of a stationary AR polynomial
/// via tanh-transformed partial autocorrelations and Durbin-Levinson.
std::vector<double> partrans(std::span<const double> raw) {
  const std::size_t p = raw.size();
  std::vector<double> out(p);
  for (std::size_t i = 0; i < p; ++i) {
    out[i] = std::tanh(raw[i]);
  }
  std::vector<double> work(out);
  for (std::size_t j = 1; j < p; ++j) {
    const double a = out[j];
    for (std::size_t k = 0; k < j; ++k) {
      work[k] -= a * out[j - k - 1];
    }
    std::copy(work.begin(), work.begin() + static_cast<long>(j), out.begin());
  }
  return out;
}

std::vector<double> invpartrans(std::span<const double> coeffs) {
  const std::size_t p = coeffs.size();
  std::vector<double> cur(coeffs.begin(), coeffs.end());
  std::vector<double> pacf(p);
  for (std::size_t j = p; j-- > 0;) {
    double a = cur[j];
    a = std::clamp(a, -0.99, 0.99);
    pacf[j] = a;
    std::vector<double> prev(j);
    const double denom = 1.0 - a * a;
    for (std::size_t k = 0; k < j; ++k) {
      prev[k] = (cur[k] + a * cur[j - k - 1]) / denom;
    }
    cur = std::move(prev);
  }
  std::vector<double> raw(p);
  for (std::size_t i = 0; i < p; ++i) {
    raw[i] = std::atanh(pacf[i]);
  }
  return raw;
}

ArmaCoefficients to_coefficients(const ArimaOrder& order, std::span<const double> raw) {
  const auto p = static_cast<std::size_t>(order.p);
  const auto q = static_cast<std::size_t>(order.q);
  const auto P = static_cast<std::size_t>(order.P);
  const auto Q = static_cast<std::size_t>(order.Q);
  ArmaCoefficients c;
  c.ar = partrans(raw.subspan(0, p));
  c.ma = partrans(raw.subspan(p, q));
  for (double& v : c.ma) {
    v = -v;
  }
  c.sar = partrans(raw.subspan(p + q, P));
  c.sma = partrans(raw.subspan(p + q + P, Q));
  for (double& v : c.sma) {
    v = -v;
  }
  return c;
}

std::vector<double> to_raw(const ArimaOrder& order, std::span<const double> arma) {
  const auto p = static_cast<std::size_t>(order.p);
  const auto q = static_cast<std::size_t>(order.q);
  const auto P = static_cast<std::size_t>(order.P);
  const auto Q = static_cast<std::size_t>(order.Q);
  auto negate = [](std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    for (double& e : out) {
      e = -e;
    }
    return out;
  };
  std::vector<double> raw;
  auto append = [&raw](const std::vector<double>& v) { raw.insert(raw.end(), v.begin(), v.end()); };
  append(invpartrans(arma.subspan(0, p)));
  append(invpartrans(negate(arma.subspan(p, q))));
  append(invpartrans(arma.subspan(p + q, P)));
  append(invpartrans(negate(arma.subspan(p + q + P, Q))));
  return raw;
}

ArmaPolynomials expand(const ArimaOrder& order, const ArmaCoefficients& c) {
  const std::size_t s = static_cast<std::size_t>(std::max(order.seasonal_period, 0));
  ArmaPolynomials poly;
  // AR: (1 - sum ar B^i)(1 - sum sar B^{si}) = 1 - sum phi B^i
  std::vector<double> ar_full(1 + c.ar.size(), 0.0);
  ar_full[0] = 1.0;
  for (std::size_t i = 0; i < c.ar.size(); ++i) {
    ar_full[i + 1] = -c.ar[i];
  }
  std::vector<double> sar_full(1 + s * c.sar.size(), 0.0);
  sar_full[0] = 1.0;
  for (std::size_t i = 0; i < c.sar.size(); ++i) {
    sar_full[(i + 1) * s] = -c.sar[i];
  }
  std::vector<double> ar_prod(ar_full.size() + sar_full.size() - 1, 0.0);
  for (std::size_t i = 0; i < ar_full.size(); ++i) {
    for (std::size_t j = 0; j < sar_full.size(); ++j) {
      ar_prod[i + j] += ar_full[i] * sar_full[j];
    }
  }
  poly.phi.resize(ar_prod.size() - 1);
  for (std::size_t i = 1; i < ar_prod.size(); ++i) {
    poly.phi[i - 1] = -ar_prod[i];
  }
  std::vector<double> ma_full(1 + c.ma.size(), 0.0);
  ma_full[0] = 1.0;
  for (std::size_t i = 0; i < c.ma.size(); ++i) {
    ma_full[i + 1] = c.ma[i];
  }
  std::vector<double> sma_full(1 + s * c.sma.size(), 0.0);
  sma_full[0] = 1.0;
  for (std::size_t i = 0; i < c.sma.size(); ++i) {
    sma_full[(i + 1) * s] = c.sma[i];
  }
  std::vector<double> ma_prod(ma_full.size() + sma_full.size() - 1, 0.0);
  for (std::size_t i = 0; i < ma_full.size(); ++i) {
    for (std::size_t j = 0; j < sma_full.size(); ++j) {
      ma_prod[i + j] += ma_full[i] * sma_full[j];
    }
  }
  poly.theta.assign(ma_prod.begin() + 1, ma_prod.end());
  return poly;
}

/// Coefficients c_0..c_m of (1-B)^d (1-B^s)^D.
std::vector<double> differencing_polynomial(const ArimaOrder& order) {
  std::vector<double> poly{1.0};
  auto multiply = [&poly](std::size_t lag) {
    std::vector<double> next(poly.size() + lag, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + lag] -= poly[i];
    }
    poly = std::move(next);
  };
  for (int i = 0; i < order.d; ++i) {
    multiply(1);
  }
  for (int i = 0; i < order.D; ++i) {
    multiply(static_cast<std::size_t>(order.seasonal_period));
  }
  return poly;
}

std::vector<double> apply_differencing(std::span<const double> x, std::span<const double> poly) {
  const std::size_t m = poly.size() - 1;
  std::vector<double> out(x.size() - m);
  for (std::size_t t = m; t < x.size(); ++t) {
    double v = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      v += poly[k] * x[t - k];
    }
    out[t - m] = v;
  }
  return out;
}

struct Profile {
  double loglik = -std::numeric_limits<double>::infinity();
  double sigma2 = 0.0;
  Eigen::VectorXd beta;
  std::size_t n_used = 0;
  std::vector<double> residuals;
  double next_prediction = 0.0;
};

/// Stationary state covariance of the Harvey-form ARMA state equation by the
/// doubling algorithm.
std::vector<double> stationary_covariance(const std::vector<double>& phi_r,
                                          const std::vector<double>& rvec, std::size_t r) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < r; ++i) {
    T(static_cast<Eigen::Index>(i), 0) = phi_r[i];
    if (i + 1 < r) {
      T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
    }
  }
  const Eigen::Map<const Eigen::VectorXd> R(rvec.data(), static_cast<Eigen::Index>(r));
  Eigen::MatrixXd P = R * R.transpose();
  Eigen::MatrixXd A = T;
  for (int iter = 0; iter < 64; ++iter) {
    const Eigen::MatrixXd inc = A * P * A.transpose();
    P += inc;
    if (inc.cwiseAbs().maxCoeff() <= 1e-15 * P.cwiseAbs().maxCoeff()) {
      break;
    }
    A = A * A;
  }
  std::vector<double> out(r * r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      out[i * r + j] = P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

/// Profiles beta and sigma2 out of the exact Gaussian likelihood. Column 0 of
/// `data` is the differenced target, the rest are differenced regressors.
Profile profile_exact(const ArmaPolynomials& poly, const Eigen::MatrixXd& data, bool keep_residuals) {
  const std::size_t n = static_cast<std::size_t>(data.rows());
  const std::size_t m = static_cast<std::size_t>(data.cols());
  const std::size_t p = poly.phi.size();
  const std::size_t q = poly.theta.size();
  const std::size_t r = std::max(p, q + 1);
  std::vector<double> phi(r, 0.0);
  std::copy(poly.phi.begin(), poly.phi.end(), phi.begin());
  std::vector<double> rv(r, 0.0);
  rv[0] = 1.0;
  std::copy(poly.theta.begin(), poly.theta.end(), rv.begin() + 1);

  std::vector<double> P = stationary_covariance(phi, rv, r);
  std::vector<double> Pn(r * r);
  std::vector<double> TP(r * r);
  std::vector<double> a(r * m, 0.0);
  std::vector<double> K(r);
  std::vector<double> v(m);
  Eigen::MatrixXd innov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  double sum_log_f = 0.0;
  bool steady = false;
  double F = 0.0;

  Profile out;
  for (std::size_t t = 0; t < n; ++t) {
    if (!steady) {
      F = P[0];
      if (!(F > 0.0) || !std::isfinite(F)) {
        return out;
      }
      for (std::size_t i = 0; i < r; ++i) {
        K[i] = P[i * r] / F;
      }
    }
    const double sqrt_f = std::sqrt(F);
    sum_log_f += std::log(F);
    for (std::size_t j = 0; j < m; ++j) {
      v[j] = data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) - a[j];
      innov(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = v[j] / sqrt_f;
    }
    // a <- T (a + K v)
    for (std::size_t j = 0; j < m; ++j) {
      const double a0 = a[j] + K[0] * v[j];
      for (std::size_t i = 0; i + 1 < r; ++i) {
        a[i * m + j] = phi[i] * a0 + a[(i + 1) * m + j] + K[i + 1] * v[j];
      }
      a[(r - 1) * m + j] = phi[r - 1] * a0;
    }
    if (!steady) {
      // P <- T (P - P e1 e1' P / F) T' + R R'
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < r; ++k) {
          Pn[i * r + k] = P[i * r + k] - P[i * r] * P[k] / F;
        }
      }
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < r; ++k) {
          TP[i * r + k] = phi[i] * Pn[k] + (i + 1 < r ? Pn[(i + 1) * r + k] : 0.0);
        }
      }
      double change = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < r; ++k) {
          const double val = TP[i * r] * phi[k] + (k + 1 < r ? TP[i * r + k + 1] : 0.0) + rv[i] * rv[k];
          change = std::max(change, std::abs(val - P[i * r + k]));
          P[i * r + k] = val;
        }
      }
      if (change < 1e-13) {
        steady = true;
        F = P[0];
        for (std::size_t i = 0; i < r; ++i) {
          K[i] = P[i * r] / F;
        }
      }
    }
  }

  const Eigen::VectorXd y = innov.col(0);
  Eigen::VectorXd resid = y;
  out.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m - 1));
  if (m > 1) {
    const Eigen::MatrixXd X = innov.rightCols(static_cast<Eigen::Index>(m - 1));
    out.beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    resid = y - X * out.beta;
  }
  const double ssr = resid.squaredNorm();
  const double nd = static_cast<double>(n);
  out.n_used = n;
  out.sigma2 = ssr / nd;
  if (!(out.sigma2 > 0.0)) {
    return out;
  }
  out.loglik = -0.5 * (nd * std::log(2.0 * M_PI * out.sigma2) + sum_log_f + nd);
  out.next_prediction = a[0];
  for (std::size_t j = 1; j < m; ++j) {
    out.next_prediction -= out.beta(static_cast<Eigen::Index>(j - 1)) * a[j];
  }
  if (keep_residuals) {
    out.residuals.assign(resid.data(), resid.data() + resid.size());
  }
  return out;
}

/// Conditional sum of squares: innovations start after the AR lags with
/// pre-sample MA innovations set to zero.
Profile profile_css(const ArmaPolynomials& poly, const Eigen::MatrixXd& data, bool keep_residuals) {
  const std::size_t n = static_cast<std::size_t>(data.rows());
  const std::size_t m = static_cast<std::size_t>(data.cols());
  const std::size_t p = poly.phi.size();
  const std::size_t q = poly.theta.size();
  Profile out;
  if (n <= p + 1) {
    return out;
  }
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    for (std::size_t t = p; t < n; ++t) {
      double v = data(static_cast<Eigen::Index>(t), col);
      for (std::size_t i = 0; i < p; ++i) {
        v -= poly.phi[i] * data(static_cast<Eigen::Index>(t - i - 1), col);
      }
      for (std::size_t k = 0; k < q && k < t - p; ++k) {
        v -= poly.theta[k] * e(static_cast<Eigen::Index>(t - k - 1), col);
      }
      e(static_cast<Eigen::Index>(t), col) = v;
    }
  }
  const Eigen::Index used = static_cast<Eigen::Index>(n - p);
  const Eigen::VectorXd y = e.col(0).tail(used);
  Eigen::VectorXd resid = y;
  out.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m - 1));
  if (m > 1) {
    const Eigen::MatrixXd X = e.rightCols(static_cast<Eigen::Index>(m - 1)).bottomRows(used);
    out.beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    resid = y - X * out.beta;
  }
  const double nd = static_cast<double>(used);
  out.n_used = static_cast<std::size_t>(used);
  out.sigma2 = resid.squaredNorm() / nd;
  if (!(out.sigma2 > 0.0)) {
    return out;
  }
  // Scaled to the full differenced length so that criteria stay comparable
  // across AR orders that condition away different numbers of observations.
  out.loglik = -0.5 * static_cast<double>(n) * (std::log(2.0 * M_PI * out.sigma2) + 1.0);
  // One-step prediction of the regression-adjusted series.
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    double v = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      v += poly.phi[i] * data(static_cast<Eigen::Index>(n - i - 1), col);
    }
    for (std::size_t k = 0; k < q && n - k - 1 >= p; ++k) {
      v += poly.theta[k] * e(static_cast<Eigen::Index>(n - k - 1), col);
    }
    pred(col) = v;
  }
  out.next_prediction = pred(0);
  for (std::size_t j = 1; j < m; ++j) {
    out.next_prediction -= out.beta(static_cast<Eigen::Index>(j - 1)) * pred(static_cast<Eigen::Index>(j));
  }
  if (keep_residuals) {
    out.residuals.assign(static_cast<std::size_t>(p), 0.0);
    out.residuals.insert(out.residuals.end(), resid.data(), resid.data() + resid.size());
  }
  return out;
}

void validate_order(const ArimaOrder& order, const FitOptions& options) {
  if (order.p < 0 || order.d < 0 || order.q < 0 || order.P < 0 || order.D < 0 || order.Q < 0 ||
      order.seasonal_period < 0) {
    throw InputError("ARIMA orders must be non-negative");
  }
  if ((order.P + order.D + order.Q) > 0 && order.seasonal_period < 2) {
    throw InputError("seasonal orders need a seasonal period >= 2");
  }
  if (order.total_differencing() > 3) {
    throw InputError("d + D must not exceed 3");
  }
  if (order.arma_count() > options.max_order) {
    throw InputError("p + q + P + Q exceeds the configured maximum of " +
                     std::to_string(options.max_order));
  }
  if (order.include_mean && order.total_differencing() > 1) {
    throw InputError("a constant term needs d + D <= 1");
  }
}

FittedModel fit_impl(const TimeSeries& target, std::span<const TimeSeries> covariates,
                     const ArimaOrder& order, const FitOptions& options) {
  validate_order(order, options);
  for (const auto& c : covariates) {
    if (c.start() != target.start() || c.size() != target.size()) {
      throw InputError("covariate '" + c.name() + "' does not share the target index");
    }
  }
  const auto diff_poly = differencing_polynomial(order);
  const std::size_t lost = diff_poly.size() - 1;
  if (target.size() <= lost) {
    throw LengthError("series too short for the requested differencing");
  }
  const std::size_t n_eff = target.size() - lost;
  const std::size_t n_reg = covariates.size() + (order.include_mean ? 1U : 0U);
  const int n_params = order.arma_count() + static_cast<int>(n_reg) + 1;
  if (n_eff < 10 + static_cast<std::size_t>(n_params)) {
    throw LengthError("effective sample size " + std::to_string(n_eff) + " is too small for " +
                      std::to_string(n_params) + " parameters");
  }

  Eigen::MatrixXd data(static_cast<Eigen::Index>(n_eff), static_cast<Eigen::Index>(1 + n_reg));
  {
    const auto w = apply_differencing(target.values(), diff_poly);
    data.col(0) = detail::as_vector(w);
    Eigen::Index col = 1;
    if (order.include_mean) {
      data.col(col++).setOnes();
    }
    for (const auto& c : covariates) {
      const auto x = apply_differencing(c.values(), diff_poly);
      data.col(col++) = detail::as_vector(x);
    }
  }

  FittedModel model;
  model.order = order;
  model.n_params = n_params;
  model.n_eff = n_eff;
  model.method = options.method;
  model.end_date = target.end();
  model.target_tail.assign(target.values().end() - static_cast<long>(lost), target.values().end());
  for (const auto& c : covariates) {
    model.covariate_names.push_back(c.name());
    model.regressor_tail.emplace_back(c.values().end() - static_cast<long>(lost), c.values().end());
  }
  const Date resid_start = target.start() + static_cast<long>(lost);

  // Identification and degeneracy checks on the plain regression.
  const Eigen::VectorXd w = data.col(0);
  double ssr = w.squaredNorm();
  if (n_reg > 0) {
    const auto fit = detail::ols(data.rightCols(static_cast<Eigen::Index>(n_reg)), w);
    if (fit.rank < static_cast<int>(n_reg)) {
      throw CollinearityError("regressors are perfectly collinear or constant after differencing");
    }
    ssr = fit.ssr;
  }
  if (ssr <= 1e-24 * std::max(w.squaredNorm(), std::numeric_limits<double>::min())) {
    model.degenerate = true;
    model.sigma2 = 0.0;
    model.loglik = std::numeric_limits<double>::infinity();
    model.aic = model.aicc = model.bic = -std::numeric_limits<double>::infinity();
    model.ar_coeffs.assign(static_cast<std::size_t>(order.p), 0.0);
    model.ma_coeffs.assign(static_cast<std::size_t>(order.q), 0.0);
    model.seasonal_ar_coeffs.assign(static_cast<std::size_t>(order.P), 0.0);
    model.seasonal_ma_coeffs.assign(static_cast<std::size_t>(order.Q), 0.0);
    model.reg_coeffs.assign(covariates.size(), 0.0);
    model.residuals = TimeSeries(target.name(), resid_start, std::vector<double>(n_eff, 0.0));
    model.min_root_modulus = std::numeric_limits<double>::infinity();
    return model;
  }

  const bool exact = options.method == Estimator::exact_ml;
  auto profile = [&](std::span<const double> raw, bool keep) {
    const auto poly = expand(order, to_coefficients(order, raw));
    return exact ? profile_exact(poly, data, keep) : profile_css(poly, data, keep);
  };

  const std::size_t k = static_cast<std::size_t>(order.arma_count());
  std::vector<double> start(k, 0.0);
  if (options.initial_arma) {
    if (options.initial_arma->size() != k) {
      throw InputError("initial ARMA vector has the wrong length");
    }
    start = to_raw(order, *options.initial_arma);
  } else if (exact && k > 0) {
    FitOptions css = options;
    css.method = Estimator::css;
    try {
      const auto pilot = fit_impl(target, covariates, order, css);
      std::vector<double> arma;
      for (const auto* v : {&pilot.ar_coeffs, &pilot.ma_coeffs, &pilot.seasonal_ar_coeffs,
                            &pilot.seasonal_ma_coeffs}) {
        arma.insert(arma.end(), v->begin(), v->end());
      }
      start = to_raw(order, arma);
    } catch (const Error&) {
      // Fall back to a white-noise start.
    }
  }

  double scale = 1.0;
  {
    const auto p0 = profile(start, false);
    scale = static_cast<double>(std::max<std::size_t>(p0.n_used, 1));
  }
  BfgsOptions bfgs;
  bfgs.max_iterations = options.max_iterations;
  bfgs.gradient_tolerance = options.gradient_tolerance;
  bfgs.function_tolerance = options.function_tolerance;
  const auto opt = minimize_bfgs(
      [&](std::span<const double> raw) { return -profile(raw, false).loglik / scale; }, start, bfgs);
  model.iterations = opt.iterations;
  if (!std::isfinite(opt.value)) {
    throw ConvergenceError("likelihood is not finite at any visited parameter value",
                           -std::numeric_limits<double>::infinity(), opt.iterations);
  }
  if (!opt.converged) {
    throw ConvergenceError("optimizer did not converge in " + std::to_string(options.max_iterations) +
                               " iterations",
                           -opt.value * scale, opt.iterations);
  }

  const auto best = profile(opt.x, true);
  const auto coeffs = to_coefficients(order, opt.x);
  model.ar_coeffs = coeffs.ar;
  model.ma_coeffs = coeffs.ma;
  model.seasonal_ar_coeffs = coeffs.sar;
  model.seasonal_ma_coeffs = coeffs.sma;
  Eigen::Index b = 0;
  if (order.include_mean) {
    model.intercept = best.beta(b++);
  }
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    model.reg_coeffs.push_back(best.beta(b++));
  }
  model.sigma2 = best.sigma2;
  model.loglik = best.loglik;
  model.next_error = best.next_prediction;
  const double kp = static_cast<double>(n_params);
  const double ne = static_cast<double>(n_eff);
  model.aic = -2.0 * model.loglik + 2.0 * kp;
  model.bic = -2.0 * model.loglik + std::log(ne) * kp;
  model.aicc = ne - kp - 1.0 > 0.0 ? model.aic + 2.0 * kp * (kp + 1.0) / (ne - kp - 1.0)
                                    : std::numeric_limits<double>::infinity();
  model.residuals = TimeSeries(target.name(), resid_start, best.residuals);

  double min_mod = std::numeric_limits<double>::infinity();
  for (const auto* poly : {&model.ar_coeffs, &model.seasonal_ar_coeffs}) {
    std::vector<double> c(poly->size());
    for (std::size_t i = 0; i < poly->size(); ++i) {
      c[i] = -(*poly)[i];
    }
    for (double mod : polynomial_root_moduli(c)) {
      min_mod = std::min(min_mod, mod);
    }
  }
  for (const auto* poly : {&model.ma_coeffs, &model.seasonal_ma_coeffs}) {
    for (double mod : polynomial_root_moduli(*poly)) {
      min_mod = std::min(min_mod, mod);
    }
  }
  model.min_root_modulus = min_mod;
  bool pinned = false;
  for (double u : opt.x) {
    pinned = pinned || std::abs(std::tanh(u)) > 1.0 - 1e-6;
  }
  model.boundary_warning = pinned || min_mod <= 1.0 + 1e-8;
  return model;
}

}  // namespace

FittedModel fit_random_walk(const TimeSeries& series) {
  if (series.size() < 2) {
    throw LengthError("random walk needs at least 2 observations");
  }
  FittedModel model;
  model.order = ArimaOrder{0, 1, 0};
  model.random_walk = true;
  model.n_params = 1;
  model.n_eff = series.size() - 1;
  model.end_date = series.end();
  model.target_tail = {series.values().back()};
  const auto diffs = difference(series.values(), 1);
  double ss = 0.0;
  for (double e : diffs) {
    ss += e * e;
  }
  const double n = static_cast<double>(diffs.size());
  model.sigma2 = ss / n;
  model.residuals = TimeSeries(series.name(), series.start() + 1, diffs);
  model.min_root_modulus = std::numeric_limits<double>::infinity();
  if (!(model.sigma2 > 0.0)) {
    model.degenerate = true;
    model.loglik = std::numeric_limits<double>::infinity();
    model.aic = model.aicc = model.bic = -std::numeric_limits<double>::infinity();
    return model;
  }
  model.loglik = -0.5 * n * (std::log(2.0 * M_PI * model.sigma2) + 1.0);
  model.aic = -2.0 * model.loglik + 2.0;
  model.bic = -2.0 * model.loglik + std::log(n);
  model.aicc = n > 2.0 ? model.aic + 4.0 / (n - 2.0) : std::numeric_limits<double>::infinity();
  return model;
}

FittedModel fit_arima(const TimeSeries& series, const ArimaOrder& order, const FitOptions& options) {
  return fit_impl(series, {}, order, options);
}

FittedModel fit_regarima(const TimeSeries& target, std::span<const TimeSeries> covariates,
                         const ArimaOrder& order, const FitOptions& options) {
  return fit_impl(target, covariates, order, options);
}

Forecast forecast_one_step(const FittedModel& model, const TimeSeries& history,
                           std::span<const double> covariate_next) {
  if (history.empty() || history.end() != model.end_date) {
    throw InputError("history does not end on the model's estimation end date");
  }
  if (covariate_next.size() != model.reg_coeffs.size()) {
    throw InputError("expected " + std::to_string(model.reg_coeffs.size()) +
                     " covariate value(s) at the forecast date, got " +
                     std::to_string(covariate_next.size()));
  }
  for (double v : covariate_next) {
    if (!std::isfinite(v)) {
      throw InputError("missing covariate value at the forecast date");
    }
  }
  const auto poly = differencing_polynomial(model.order);
  const std::size_t lost = poly.size() - 1;
  if (history.size() < lost) {
    throw LengthError("history too short to undo differencing");
  }

  double w = model.next_error;
  if (model.intercept) {
    w += *model.intercept;
  }
  for (std::size_t j = 0; j < model.reg_coeffs.size(); ++j) {
    // Differenced regressor at the forecast date.
    const auto& tail = model.regressor_tail[j];
    double x = poly[0] * covariate_next[j];
    for (std::size_t k = 1; k <= lost; ++k) {
      x += poly[k] * tail[lost - k];
    }
    w += model.reg_coeffs[j] * x;
  }
  const auto& y = history.values();
  double point = w;
  for (std::size_t k = 1; k <= lost; ++k) {
    point -= poly[k] * y[y.size() - k];
  }
  if (!std::isfinite(point)) {
    throw InputError("forecast is not finite");
  }
  return Forecast{point, 1, history.end()};
}

}  // namespace horserace

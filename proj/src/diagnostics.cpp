#include "horserace/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "horserace/errors.hpp"
#include "stats_util.hpp"

namespace horserace {

namespace {

void require_finite(std::span<const double> x, const char* test) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw InputError(std::string(test) + ": non-finite input");
    }
  }
}

/// Linear interpolation of p over an increasing statistic grid; outside the
/// grid p is clamped to the end values.
double interpolate(double stat, std::span<const double> grid, std::span<const double> p) {
  if (stat <= grid.front()) {
    return p.front();
  }
  if (stat >= grid.back()) {
    return p.back();
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (stat <= grid[i]) {
      const double w = (stat - grid[i - 1]) / (grid[i] - grid[i - 1]);
      return p[i - 1] + w * (p[i] - p[i - 1]);
    }
  }
  return p.back();
}

// Dickey-Fuller tau distribution with a constant (Fuller 1976).
constexpr std::array<double, 6> kDfSizes{25, 50, 100, 250, 500, 100000};
constexpr std::array<double, 8> kDfProbs{0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
constexpr std::array<std::array<double, 8>, 6> kDfTable{{
    {-3.75, -3.33, -3.00, -2.62, -0.37, 0.00, 0.34, 0.72},
    {-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66},
    {-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63},
    {-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62},
    {-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61},
    {-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60},
}};

double dickey_fuller_p(double tau, std::size_t n) {
  const double nn = std::clamp(static_cast<double>(n), kDfSizes.front(), kDfSizes.back());
  std::array<double, 8> crit{};
  for (std::size_t j = 0; j < kDfProbs.size(); ++j) {
    std::array<double, 6> column{};
    for (std::size_t i = 0; i < kDfSizes.size(); ++i) {
      column[i] = kDfTable[i][j];
    }
    crit[j] = interpolate(nn, kDfSizes, column);
  }
  return interpolate(tau, crit, kDfProbs);
}

/// Bartlett-weighted long-run variance of a mean-zero series.
double long_run_variance(std::span<const double> e, std::size_t lags) {
  const std::size_t n = e.size();
  double s = 0.0;
  for (double v : e) {
    s += v * v;
  }
  s /= static_cast<double>(n);
  for (std::size_t j = 1; j <= lags && j < n; ++j) {
    double g = 0.0;
    for (std::size_t t = j; t < n; ++t) {
      g += e[t] * e[t - j];
    }
    g /= static_cast<double>(n);
    s += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(lags + 1)) * g;
  }
  return s;
}

std::size_t newey_west_bandwidth(std::span<const double> e) {
  const std::size_t n = e.size();
  const double nd = static_cast<double>(n);
  const auto nlag = static_cast<std::size_t>(std::trunc(4.0 * std::pow(nd / 100.0, 2.0 / 9.0)));
  auto gamma = [&](std::size_t j) {
    double g = 0.0;
    for (std::size_t t = j; t < n; ++t) {
      g += e[t] * e[t - j];
    }
    return g / nd;
  };
  double s0 = gamma(0);
  double s1 = 0.0;
  for (std::size_t j = 1; j <= nlag && j < n; ++j) {
    const double g = gamma(j);
    s0 += 2.0 * g;
    s1 += 2.0 * static_cast<double>(j) * g;
  }
  if (s0 == 0.0) {
    return 0;
  }
  const double g_hat = 1.1447 * std::pow((s1 / s0) * (s1 / s0), 1.0 / 3.0);
  const double bw = std::trunc(g_hat * std::pow(nd, 1.0 / 3.0));
  return static_cast<std::size_t>(std::min(bw, nd - 1.0));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_in(std::uint64_t& state, double lo, double hi) {
  const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

std::size_t default_lb_lags(std::size_t n, std::size_t max_lags) {
  return std::max<std::size_t>(1, std::min(max_lags, n / 5));
}

TestResult ljung_box(std::span<const double> residuals, std::size_t n_lags, int fitted_params) {
  const std::size_t n = residuals.size();
  if (n_lags < 1 || n <= n_lags) {
    throw LengthError("Ljung-Box needs 1 <= lags < length");
  }
  require_finite(residuals, "Ljung-Box");
  const auto r = acf(residuals, n_lags).values;
  const double nd = static_cast<double>(n);
  double q = 0.0;
  for (std::size_t l = 1; l <= n_lags; ++l) {
    q += r[l - 1] * r[l - 1] / (nd - static_cast<double>(l));
  }
  q *= nd * (nd + 2.0);
  const int df = std::max(1, static_cast<int>(n_lags) - std::max(0, fitted_params));
  return {"ljung_box", q, detail::chi2_sf(q, df), df};
}

TestResult kpss(std::span<const double> series, KpssBandwidth bandwidth) {
  const std::size_t n = series.size();
  if (n < 30) {
    throw LengthError("KPSS needs at least 30 observations");
  }
  require_finite(series, "KPSS");
  const double nd = static_cast<double>(n);
  const double m = mean(series);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = series[i] - m;
  }
  const std::size_t lags = bandwidth == KpssBandwidth::newey_west
                               ? newey_west_bandwidth(e)
                               : static_cast<std::size_t>(std::trunc(4.0 * std::pow(nd / 100.0, 0.25)));
  const double lrv = long_run_variance(e, lags);
  if (!(lrv > 0.0)) {
    throw VarianceError("KPSS on a constant series");
  }
  double partial = 0.0;
  double eta = 0.0;
  for (double v : e) {
    partial += v;
    eta += partial * partial;
  }
  const double stat = eta / (nd * nd * lrv);
  static constexpr std::array<double, 4> crit{0.347, 0.463, 0.574, 0.739};
  static constexpr std::array<double, 4> probs{0.10, 0.05, 0.025, 0.01};
  return {"kpss", stat, interpolate(stat, crit, probs), static_cast<int>(lags)};
}

TestResult adf(std::span<const double> series, AdfLagPolicy lag_policy) {
  const std::size_t n = series.size();
  if (n < 30) {
    throw LengthError("ADF needs at least 30 observations");
  }
  require_finite(series, "ADF");
  if (is_constant(series)) {
    throw VarianceError("ADF on a constant series");
  }
  const auto max_k = static_cast<std::size_t>(std::trunc(std::cbrt(static_cast<double>(n - 1))));
  const auto dy = difference(series, 1);

  // Regression of dy_t on [1, y_{t-1}, dy_{t-1..t-k}] for t = max_k+1 .. n-1.
  auto design = [&](std::size_t k, std::size_t first) {
    const std::size_t rows = dy.size() - first;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(2 + k));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t t = first + i;  // index into dy; dy[t] = y[t+1] - y[t]
      const auto row = static_cast<Eigen::Index>(i);
      y(row) = dy[t];
      X(row, 0) = 1.0;
      X(row, 1) = series[t];
      for (std::size_t j = 1; j <= k; ++j) {
        X(row, static_cast<Eigen::Index>(1 + j)) = dy[t - j];
      }
    }
    return std::make_pair(X, y);
  };

  std::size_t k = max_k;
  if (lag_policy == AdfLagPolicy::aic) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t cand = 0; cand <= max_k; ++cand) {
      const auto [X, y] = design(cand, max_k);
      const auto fit = detail::ols(X, y);
      const double rows = static_cast<double>(y.size());
      const double aic = rows * std::log(fit.ssr / rows) + 2.0 * static_cast<double>(X.cols());
      if (aic < best) {
        best = aic;
        k = cand;
      }
    }
  }
  const auto [X, y] = design(k, k);
  const auto fit = detail::ols(X, y, true);
  if (fit.std_errors.size() == 0 || !(fit.std_errors(1) > 0.0)) {
    throw VarianceError("ADF regression is singular");
  }
  const double tau = fit.beta(1) / fit.std_errors(1);
  return {"adf", tau, dickey_fuller_p(tau, static_cast<std::size_t>(y.size())), static_cast<int>(k)};
}

TestResult phillips_perron(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 30) {
    throw LengthError("Phillips-Perron needs at least 30 observations");
  }
  require_finite(series, "Phillips-Perron");
  if (is_constant(series)) {
    throw VarianceError("Phillips-Perron on a constant series");
  }
  const std::size_t rows = n - 1;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  for (std::size_t t = 1; t < n; ++t) {
    const auto row = static_cast<Eigen::Index>(t - 1);
    y(row) = series[t];
    X(row, 0) = 1.0;
    X(row, 1) = series[t - 1];
  }
  const auto fit = detail::ols(X, y, true);
  if (fit.std_errors.size() == 0 || !(fit.std_errors(1) > 0.0)) {
    throw VarianceError("Phillips-Perron regression is singular");
  }
  const double nd = static_cast<double>(rows);
  const double rho = fit.beta(1);
  const double se_rho = fit.std_errors(1);
  const double t_rho = (rho - 1.0) / se_rho;
  const std::vector<double> u(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  const auto lags = static_cast<std::size_t>(std::trunc(4.0 * std::pow(nd / 100.0, 0.25)));
  const double gamma0 = fit.ssr / nd;
  const double lambda2 = long_run_variance(u, lags);
  const double s = std::sqrt(fit.ssr / (nd - 2.0));
  const double lambda = std::sqrt(lambda2);
  const double z_tau =
      std::sqrt(gamma0 / lambda2) * t_rho - 0.5 * (lambda2 - gamma0) / lambda * (nd * se_rho / s);
  return {"phillips_perron", z_tau, dickey_fuller_p(z_tau, rows), static_cast<int>(lags)};
}

TestResult white_nn_test(std::span<const double> series, int n_hidden, std::uint64_t seed) {
  const std::size_t n = series.size();
  if (n < 50) {
    throw LengthError("White neural-network test needs at least 50 observations");
  }
  if (n_hidden < 1) {
    throw InputError("White test needs at least one hidden unit");
  }
  require_finite(series, "White test");
  const std::size_t rows = n - 1;
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  Eigen::VectorXd x(static_cast<Eigen::Index>(rows));
  for (std::size_t t = 1; t < n; ++t) {
    y(static_cast<Eigen::Index>(t - 1)) = series[t];
    x(static_cast<Eigen::Index>(t - 1)) = series[t - 1];
  }
  const double xm = x.mean();
  const double xs = std::sqrt((x.array() - xm).square().mean());
  if (!(xs > 0.0)) {
    throw VarianceError("White test on a constant series");
  }
  const Eigen::VectorXd z = (x.array() - xm) / xs;

  Eigen::MatrixXd base(static_cast<Eigen::Index>(rows), 2);
  base.col(0).setOnes();
  base.col(1) = z;
  const auto linear = detail::ols(base, y);

  Eigen::MatrixXd aug(static_cast<Eigen::Index>(rows), 2 + n_hidden);
  aug.leftCols(2) = base;
  std::uint64_t state = seed;
  for (int j = 0; j < n_hidden; ++j) {
    const double g0 = uniform_in(state, -2.0, 2.0);
    const double g1 = uniform_in(state, -2.0, 2.0);
    aug.col(2 + j) = (1.0 / (1.0 + (-(g0 + g1 * z.array())).exp())).matrix();
  }
  const auto aux = detail::ols(aug, linear.residuals);
  const double r2 = detail::r_squared(linear.residuals, aux);
  const double stat = static_cast<double>(rows) * std::max(0.0, r2);
  return {"white_nn", stat, detail::chi2_sf(stat, n_hidden), n_hidden};
}

TestResult breusch_pagan(std::span<const double> series, BreuschPaganInput input) {
  if (series.size() < 30) {
    throw LengthError("Breusch-Pagan needs at least 30 observations");
  }
  require_finite(series, "Breusch-Pagan");
  const std::vector<double> v = input == BreuschPaganInput::differences
                                    ? difference(series, 1)
                                    : std::vector<double>(series.begin(), series.end());
  if (is_constant(v)) {
    throw VarianceError("Breusch-Pagan on a constant series");
  }
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd X(n, 2);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = 1.0;
    X(t, 1) = static_cast<double>(t + 1) / static_cast<double>(n);
  }
  const auto trend = detail::ols(X, detail::as_vector(v));
  const Eigen::VectorXd e2 = trend.residuals.array().square();
  const auto aux = detail::ols(X, e2);
  const double r2 = detail::r_squared(e2, aux);
  const double stat = static_cast<double>(n) * std::max(0.0, r2);
  return {"breusch_pagan", stat, detail::chi2_sf(stat, 1.0), 1};
}

TestResult breusch_pagan(const TimeSeries& target, BreuschPaganInput input) {
  return breusch_pagan(std::span<const double>(target.values()), input);
}

std::vector<double> vif(std::span<const TimeSeries> covariates) {
  if (covariates.size() < 2) {
    throw InputError("VIF needs at least 2 covariates");
  }
  const auto n = static_cast<Eigen::Index>(covariates.front().size());
  for (const auto& c : covariates) {
    if (static_cast<Eigen::Index>(c.size()) != n) {
      throw InputError("VIF covariates differ in length");
    }
    if (!(variance(c.values()) > 0.0)) {
      throw VarianceError("covariate '" + c.name() + "' has zero variance");
    }
  }
  const auto k = static_cast<Eigen::Index>(covariates.size());
  std::vector<double> out;
  out.reserve(covariates.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::MatrixXd X(n, k);
    X.col(0).setOnes();
    Eigen::Index col = 1;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i != j) {
        X.col(col++) = detail::as_vector(covariates[static_cast<std::size_t>(i)].values());
      }
    }
    const Eigen::VectorXd y = detail::as_vector(covariates[static_cast<std::size_t>(j)].values());
    const auto fit = detail::ols(X, y);
    const double r2 = detail::r_squared(y, fit);
    out.push_back(r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2));
  }
  return out;
}

std::vector<double> bonferroni_adjust(std::span<const double> p_values, int m) {
  if (p_values.empty() || m < static_cast<int>(p_values.size())) {
    throw InputError("Bonferroni needs m >= number of p-values >= 1");
  }
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("p-value outside [0, 1]");
    }
    out.push_back(std::min(1.0, static_cast<double>(m) * p));
  }
  return out;
}

QQData qq_data(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 10) {
    throw LengthError("Q-Q data needs at least 10 residuals");
  }
  require_finite(residuals, "Q-Q");
  QQData out;
  out.sample_quantiles.assign(residuals.begin(), residuals.end());
  std::sort(out.sample_quantiles.begin(), out.sample_quantiles.end());
  // Moments from the sorted copy so the output is invariant to input order.
  const double mu = mean(out.sample_quantiles);
  const double sd = std::sqrt(variance(out.sample_quantiles));
  const double nd = static_cast<double>(n);
  const double z975 = detail::normal_quantile(0.975);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / nd;
    const double z = detail::normal_quantile(p);
    const double se = std::sqrt(p * (1.0 - p) / nd) / detail::normal_pdf(z);
    out.theoretical_quantiles.push_back(z);
    out.band_lower.push_back(mu + sd * (z - z975 * se));
    out.band_upper.push_back(mu + sd * (z + z975 * se));
  }
  return out;
}

DiagnosticBattery run_battery(std::span<const double> residuals, const BatteryConfig& config) {
  if (residuals.empty()) {
    throw LengthError("diagnostic battery on empty residuals");
  }
  DiagnosticBattery b;
  const std::size_t lags = default_lb_lags(residuals.size(), config.max_lb_lags);
  b.ljung_box = ljung_box(residuals, lags, config.fitted_params);
  b.kpss = kpss(residuals);
  b.adf = adf(residuals, config.adf_lags);
  b.phillips_perron = phillips_perron(residuals);
  b.white_nn = white_nn_test(residuals, config.white_hidden, config.seed);

  const double a = config.alpha_gate;
  auto flag = [&b](const char* reason) {
    if (!b.anomaly) {
      b.anomaly = true;
      b.anomaly_reason = reason;
    }
  };
  if (config.gate_ljung_box && b.ljung_box.p_value < a) {
    flag("ljung_box: residual autocorrelation");
  }
  if (config.gate_adf && b.adf.p_value > a) {
    flag("adf: unit root not rejected");
  }
  if (config.gate_phillips_perron && b.phillips_perron.p_value > a) {
    flag("phillips_perron: unit root not rejected");
  }
  if (config.gate_kpss && b.kpss.p_value < a) {
    flag("kpss: stationarity rejected");
  }
  if (config.gate_white && b.white_nn.p_value < a) {
    flag("white_nn: neglected nonlinearity");
  }
  return b;
}

}  // namespace horserace

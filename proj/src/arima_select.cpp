#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "horserace/arima.hpp"
#include "horserace/diagnostics.hpp"
#include "horserace/errors.hpp"
#include "stats_util.hpp"

namespace horserace {

double seasonal_strength(std::span<const double> values, int period) {
  if (period < 2) {
    throw InputError("seasonal period must be at least 2");
  }
  const auto s = static_cast<std::size_t>(period);
  const std::size_t n = values.size();
  if (n < 3 * s) {
    throw LengthError("seasonal strength needs at least three full periods");
  }
  // Centered moving average; a 2 x s average for even periods.
  const std::size_t half = s / 2;
  std::vector<double> trend(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = half; t + half < n; ++t) {
    double sum = 0.0;
    if (s % 2 == 1) {
      for (std::size_t k = t - half; k <= t + half; ++k) {
        sum += values[k];
      }
      trend[t] = sum / static_cast<double>(s);
    } else {
      sum = 0.5 * values[t - half] + 0.5 * values[t + half];
      for (std::size_t k = t - half + 1; k < t + half; ++k) {
        sum += values[k];
      }
      trend[t] = sum / static_cast<double>(s);
    }
  }
  std::vector<double> season_sum(s, 0.0);
  std::vector<int> season_count(s, 0);
  for (std::size_t t = 0; t < n; ++t) {
    if (!std::isnan(trend[t])) {
      season_sum[t % s] += values[t] - trend[t];
      ++season_count[t % s];
    }
  }
  std::vector<double> season(s);
  double centre = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    season[i] = season_sum[i] / season_count[i];
    centre += season[i];
  }
  centre /= static_cast<double>(s);
  for (double& v : season) {
    v -= centre;
  }
  std::vector<double> remainder;
  std::vector<double> detrended;
  for (std::size_t t = 0; t < n; ++t) {
    if (!std::isnan(trend[t])) {
      const double dt = values[t] - trend[t];
      detrended.push_back(dt);
      remainder.push_back(dt - season[t % s]);
    }
  }
  const double v_sr = variance(detrended);
  if (!(v_sr > 0.0)) {
    return 0.0;
  }
  return std::max(0.0, 1.0 - variance(remainder) / v_sr);
}

namespace {

using Key = std::tuple<int, int, int, int, bool>;

}  // namespace

ArimaOrder auto_select_order(const TimeSeries& target, std::span<const TimeSeries> covariates,
                             const AutoArimaConfig& config) {
  if (target.size() < 30) {
    throw LengthError("order selection needs at least 30 observations");
  }
  // Unit-root and seasonal tests run on the regression residuals.
  std::vector<double> resid = target.values();
  if (!covariates.empty()) {
    const auto n = static_cast<Eigen::Index>(target.size());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(1 + covariates.size()));
    X.col(0).setOnes();
    for (std::size_t j = 0; j < covariates.size(); ++j) {
      X.col(static_cast<Eigen::Index>(j + 1)) = detail::as_vector(covariates[j].values());
    }
    const auto fit = detail::ols(X, detail::as_vector(target.values()));
    if (fit.rank < X.cols()) {
      throw CollinearityError("covariates are constant or perfectly collinear");
    }
    resid.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  }

  ArimaOrder base;
  if (config.seasonal_period >= 2 && config.max_D > 0 &&
      resid.size() >= 3 * static_cast<std::size_t>(config.seasonal_period) + 30) {
    if (seasonal_strength(resid, config.seasonal_period) > config.seasonal_strength_threshold) {
      base.seasonal_period = config.seasonal_period;
      base.D = 1;
      const auto lag = static_cast<std::size_t>(config.seasonal_period);
      std::vector<double> next(resid.size() - lag);
      for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = resid[i + lag] - resid[i];
      }
      resid = std::move(next);
    }
  }
  const bool constant_series =
      std::all_of(resid.begin(), resid.end(), [&](double v) { return v == resid.front(); });
  while (!constant_series && base.d < config.max_d && resid.size() >= 31) {
    if (kpss(resid).p_value >= config.kpss_alpha) {
      break;
    }
    resid = difference(resid, 1);
    ++base.d;
  }
  const bool seasonal = base.D > 0;
  const bool mean_allowed = config.allow_mean && base.total_differencing() <= 1;

  FitOptions options;
  options.method = config.approximate ? Estimator::css : Estimator::exact_ml;
  options.max_order = config.max_order;
  // Candidates only need to be ranked, not polished.
  options.function_tolerance = config.search_tolerance;

  std::map<Key, double> scores;
  auto score = [&](int p, int q, int P, int Q, bool mean) {
    if (p < 0 || q < 0 || P < 0 || Q < 0 || p > config.max_p || q > config.max_q ||
        P > config.max_P || Q > config.max_Q || p + q + P + Q > config.max_order ||
        (mean && !mean_allowed) || (!seasonal && (P + Q) > 0)) {
      return std::numeric_limits<double>::infinity();
    }
    const Key key{p, q, P, Q, mean};
    if (auto it = scores.find(key); it != scores.end()) {
      return it->second;
    }
    if (static_cast<int>(scores.size()) >= config.max_models) {
      return std::numeric_limits<double>::infinity();
    }
    ArimaOrder order = base;
    order.p = p;
    order.q = q;
    order.P = P;
    order.Q = Q;
    order.include_mean = mean;
    double value = std::numeric_limits<double>::infinity();
    try {
      const auto fit = fit_regarima(target, covariates, order, options);
      if (fit.degenerate) {
        value = -std::numeric_limits<double>::infinity();
      } else if (fit.min_root_modulus >= config.min_root_modulus) {
        value = fit.aicc;
      }
    } catch (const Error&) {
    }
    scores.emplace(key, value);
    return value;
  };

  Key best{0, 0, 0, 0, mean_allowed};
  double best_score = std::numeric_limits<double>::infinity();
  auto consider = [&](int p, int q, int P, int Q, bool mean) {
    const double s = score(p, q, P, Q, mean);
    if (s < best_score) {
      best_score = s;
      best = Key{p, q, P, Q, mean};
      return true;
    }
    return false;
  };

  const int sp = seasonal ? 1 : 0;
  consider(2, 2, sp, sp, mean_allowed);
  consider(0, 0, 0, 0, mean_allowed);
  consider(1, 0, sp, 0, mean_allowed);
  consider(0, 1, 0, sp, mean_allowed);
  if (mean_allowed) {
    consider(0, 0, 0, 0, false);
  }

  // First-improvement moves: restart from the new best as soon as a
  // neighbour lowers the criterion.
  struct Move {
    int dp, dq, dP, dQ;
  };
  constexpr Move kMoves[] = {{-1, 0, 0, 0},  {0, 0, -1, 0}, {0, -1, 0, 0},  {0, 0, 0, -1},
                             {0, 1, 0, 0},   {0, 0, 0, 1},  {1, 0, 0, 0},   {0, 0, 1, 0},
                             {0, 0, -1, -1}, {0, 0, -1, 1}, {0, 0, 1, -1},  {0, 0, 1, 1},
                             {-1, -1, 0, 0}, {-1, 1, 0, 0}, {1, -1, 0, 0},  {1, 1, 0, 0}};
  bool improved = true;
  while (improved && static_cast<int>(scores.size()) < config.max_models) {
    improved = false;
    const auto [p, q, P, Q, mean] = best;
    for (const auto& m : kMoves) {
      if (consider(p + m.dp, q + m.dq, P + m.dP, Q + m.dQ, mean)) {
        improved = true;
        break;
      }
    }
    if (!improved && mean_allowed) {
      improved = consider(p, q, P, Q, !mean);
    }
  }

  if (!std::isfinite(best_score) && best_score > 0.0) {
    throw SelectionError("no candidate ARIMA model could be fitted");
  }
  ArimaOrder out = base;
  std::tie(out.p, out.q, out.P, out.Q, out.include_mean) = best;
  if (out.P + out.Q == 0 && out.D == 0) {
    out.seasonal_period = 0;
  }
  return out;
}

}  // namespace horserace

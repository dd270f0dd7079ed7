#include "horserace/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "horserace/errors.hpp"
#include "horserace/random.hpp"

namespace horserace {

std::uint64_t window_seed(std::uint64_t run_seed, const std::string& covariate, int R, int origin) {
  std::uint64_t h = mix64(run_seed);
  h = mix64(h ^ hash_name(covariate));
  h = mix64(h ^ static_cast<std::uint64_t>(R));
  return mix64(h ^ static_cast<std::uint64_t>(origin));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pairs(std::span<const double> forecasts, std::span<const double> actuals) {
  if (forecasts.empty() || forecasts.size() != actuals.size()) {
    throw InputError("forecasts and actuals must have equal nonzero length");
  }
}

void skip(WindowResult& w, std::string reason) {
  w.skipped = true;
  w.skip_reason = std::move(reason);
}

}  // namespace

double msfe(std::span<const double> forecasts, std::span<const double> actuals) {
  check_pairs(forecasts, actuals);
  double s = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const double e = actuals[i] - forecasts[i];
    s += e * e;
  }
  return s / static_cast<double>(forecasts.size());
}

double mae(std::span<const double> forecasts, std::span<const double> actuals) {
  check_pairs(forecasts, actuals);
  double s = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    s += std::abs(actuals[i] - forecasts[i]);
  }
  return s / static_cast<double>(forecasts.size());
}

ScoreTable delta_scale(const ScoreTable& table) {
  double lowest = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& row : table) {
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw InputError("delta scaling needs finite scores");
      }
      lowest = std::min(lowest, v);
      any = true;
    }
  }
  if (!any) {
    throw InputError("delta scaling of an empty table");
  }
  ScoreTable out = table;
  for (auto& row : out) {
    for (double& v : row) {
      v -= lowest;
    }
  }
  return out;
}

TimeSeries make_noise_covariate(const Panel& panel, std::uint64_t seed) {
  std::vector<double> pool;
  for (const auto& c : panel.covariates()) {
    if (c.name() != kNoiseCovariate) {
      pool.insert(pool.end(), c.values().begin(), c.values().end());
    }
  }
  if (pool.empty()) {
    throw InputError("noise covariate needs at least one covariate to resample");
  }
  Rng rng(mix64(seed ^ hash_name(kNoiseCovariate)));
  std::vector<double> values(panel.T());
  for (double& v : values) {
    v = pool[rng.below(pool.size())];
  }
  return TimeSeries(kNoiseCovariate, panel.target().start(), std::move(values));
}

double avg_predictability(std::span<const double> per_split_delta_msfe) {
  if (per_split_delta_msfe.empty()) {
    throw InputError("predictability average needs at least one split");
  }
  double s = 0.0;
  for (double v : per_split_delta_msfe) {
    s += v;
  }
  return s / static_cast<double>(per_split_delta_msfe.size());
}

std::map<std::string, int> rank_difference(const std::map<std::string, int>& frequency_ranks,
                                           const std::map<std::string, int>& predictability_ranks) {
  if (frequency_ranks.size() != predictability_ranks.size()) {
    throw InputError("frequency and predictability ranks cover different covariates");
  }
  std::map<std::string, int> out;
  for (const auto& [name, freq] : frequency_ranks) {
    const auto it = predictability_ranks.find(name);
    if (it == predictability_ranks.end()) {
      throw InputError("covariate '" + name + "' has no predictability rank");
    }
    out[name] = it->second - freq;
  }
  return out;
}

std::vector<WindowResult> rolling_cv(const Panel& panel, const std::string& covariate_name, int R,
                                     const EvaluationConfig& config) {
  const int T = static_cast<int>(panel.T());
  if (R < 2 || R >= T) {
    throw ConfigError("window length R=" + std::to_string(R) + " must satisfy 2 <= R < T=" +
                      std::to_string(T));
  }
  if (config.covariate_lag < 0) {
    throw ConfigError("covariate lag must be non-negative");
  }
  const bool rw_arm = covariate_name.empty();
  std::optional<TimeSeries> drawn;
  const TimeSeries* covariate = nullptr;
  if (!rw_arm) {
    covariate = panel.find(covariate_name);
    if (covariate == nullptr && covariate_name == kNoiseCovariate) {
      drawn = make_noise_covariate(panel, config.seed);
      covariate = &*drawn;
    }
    if (covariate == nullptr) {
      throw ConfigError("covariate '" + covariate_name + "' is not in the panel");
    }
  }
  const TimeSeries& y = panel.target();
  const int lag = config.covariate_lag;

  std::vector<WindowResult> out;
  out.reserve(static_cast<std::size_t>(T - R));
  for (int t = R - 1; t <= T - 2; ++t) {
    WindowResult w;
    w.covariate_name = covariate_name;
    w.R = R;
    w.origin_index = t;
    w.actual = y[static_cast<std::size_t>(t + 1)];
    w.rw_forecast = y[static_cast<std::size_t>(t)];
    w.forecast = w.rw_forecast;

    BatteryConfig battery = config.battery;
    battery.seed = window_seed(config.seed, covariate_name, R, t);
    try {
      if (rw_arm) {
        const auto window = y.slice(static_cast<std::size_t>(t - R + 1), static_cast<std::size_t>(R));
        const auto model = fit_random_walk(window);
        w.order = model.order;
        w.aic = model.aic;
        w.bic = model.bic;
        if (model.degenerate) {
          skip(w, "degenerate: zero innovation variance");
        } else {
          // The benchmark has nothing to re-specify: diagnostics are recorded
          // but never gate its forecasts.
          battery.fitted_params = 0;
          w.battery = run_battery(model.residuals.values(), battery);
        }
      } else {
        // The regressor for date i is x[i - lag]; drop dates where it does not exist.
        const int first = std::max(t - R + 1, lag);
        const auto count = static_cast<std::size_t>(t - first + 1);
        const auto target = y.slice(static_cast<std::size_t>(first), count);
        const auto& xv = covariate->values();
        std::vector<double> reg(xv.begin() + (first - lag), xv.begin() + (t - lag + 1));
        const TimeSeries regressor(covariate_name, target.start(), std::move(reg));
        const std::vector<TimeSeries> regs{regressor};

        const auto order = auto_select_order(target, regs, config.arima);
        FitOptions fit;
        fit.max_order = config.arima.max_order;
        const auto model = fit_regarima(target, regs, order, fit);
        w.order = model.order;
        w.aic = model.aic;
        w.bic = model.bic;
        if (model.degenerate) {
          skip(w, "degenerate: zero innovation variance");
        } else {
          battery.fitted_params = order.arma_count();
          w.battery = run_battery(model.residuals.values(), battery);
          if (w.battery.anomaly) {
            skip(w, w.battery.anomaly_reason);
          } else {
            const double next = xv[static_cast<std::size_t>(t + 1 - lag)];
            w.forecast = forecast_one_step(model, target, std::span<const double>(&next, 1)).point;
          }
        }
      }
    } catch (const ConvergenceError& e) {
      skip(w, std::string("convergence: ") + e.what());
    } catch (const Error& e) {
      skip(w, std::string("estimation: ") + e.what());
    }
    out.push_back(std::move(w));
  }
  return out;
}

SplitSummary summarize_split(std::span<const WindowResult> windows, const std::string& covariate_name,
                             int R) {
  SplitSummary s;
  s.covariate_name = covariate_name;
  s.R = R;
  s.P_attempted = static_cast<int>(windows.size());
  std::vector<double> f;
  std::vector<double> rw;
  std::vector<double> a;
  double aic = 0.0;
  double bic = 0.0;
  for (const auto& w : windows) {
    if (w.skipped) {
      s.skips.push_back({w.origin_index, w.skip_reason});
      continue;
    }
    f.push_back(w.forecast);
    rw.push_back(w.rw_forecast);
    a.push_back(w.actual);
    s.forecast_errors.push_back(w.actual - w.forecast);
    aic += w.aic;
    bic += w.bic;
  }
  s.P_effective = static_cast<int>(f.size());
  if (s.P_effective == 0) {
    s.msfe = s.mae = s.rw_msfe = s.rw_mae = s.mean_aic = s.mean_bic = kNaN;
    return s;
  }
  s.msfe = msfe(f, a);
  s.mae = mae(f, a);
  s.rw_msfe = msfe(rw, a);
  s.rw_mae = mae(rw, a);
  s.mean_aic = aic / s.P_effective;
  s.mean_bic = bic / s.P_effective;
  s.outperformed_rw = s.msfe < s.rw_msfe;
  return s;
}

namespace {

double metric_of(const SplitSummary& s, Metric m) { return m == Metric::msfe ? s.msfe : s.mae; }
double rw_metric_of(const SplitSummary& s, Metric m) { return m == Metric::msfe ? s.rw_msfe : s.rw_mae; }

}  // namespace

ModeVotes mode_vote(const SplitGrid& grid, Metric metric) {
  const auto rand_it = std::find(grid.covariates.begin(), grid.covariates.end(), kNoiseCovariate);
  if (rand_it == grid.covariates.end()) {
    throw ConfigError("mode vote needs the noise covariate '" + kNoiseCovariate + "' in the grid");
  }
  const auto rand_row = static_cast<std::size_t>(rand_it - grid.covariates.begin());
  if (grid.cells.size() != grid.covariates.size()) {
    throw InputError("split grid rows do not match covariates");
  }
  ModeVotes votes;
  for (int R : grid.windows) {
    votes.by_window[R] = 0;
  }
  for (std::size_t c = 0; c < grid.covariates.size(); ++c) {
    const auto& name = grid.covariates[c];
    if (grid.cells[c].size() != grid.windows.size()) {
      throw InputError("split grid row '" + name + "' does not cover every window");
    }
    int count = 0;
    for (std::size_t v = 0; v < grid.windows.size(); ++v) {
      const auto& cell = grid.cells[c][v];
      const double m = metric_of(cell, metric);
      // NaN comparisons are false, so void cells never score.
      bool wins = m < rw_metric_of(cell, metric);
      if (c != rand_row) {
        wins = wins && m < metric_of(grid.cells[rand_row][v], metric);
      }
      if (wins) {
        ++count;
        if (c != rand_row) {
          ++votes.by_window[grid.windows[v]];
        }
      }
    }
    votes.by_covariate[name] = count;
  }
  return votes;
}

}  // namespace horserace

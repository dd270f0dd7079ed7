#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "horserace/errors.hpp"
#include "horserace/evaluation.hpp"

namespace horserace {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Task {
  std::string covariate;  // empty = random-walk arm
  int R = 0;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results are written by
// index, so scheduling never changes the outcome.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::clamp<int>(jobs, 1, 256));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

double mean_finite(const std::vector<SplitSummary>& cells, double SplitSummary::*field) {
  double s = 0.0;
  int n = 0;
  for (const auto& c : cells) {
    if (!c.is_void()) {
      s += c.*field;
      ++n;
    }
  }
  return n > 0 ? s / n : kNaN;
}

// delta_scale over the rows that have finite scores; void rows stay NaN.
ScoreTable scale_rows(const ScoreTable& table) {
  ScoreTable finite;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (std::all_of(table[i].begin(), table[i].end(), [](double v) { return std::isfinite(v); })) {
      finite.push_back(table[i]);
      where.push_back(i);
    }
  }
  ScoreTable out(table.size(), std::vector<double>(table.empty() ? 0 : table.front().size(), kNaN));
  if (finite.empty()) {
    return out;
  }
  const auto scaled = delta_scale(finite);
  for (std::size_t k = 0; k < where.size(); ++k) {
    out[where[k]] = scaled[k];
  }
  return out;
}

}  // namespace

std::size_t HorseRaceReport::windows_attempted() const {
  std::size_t n = 0;
  for (const auto& row : grid.cells) {
    for (const auto& c : row) {
      n += static_cast<std::size_t>(c.P_attempted);
    }
  }
  for (const auto& c : rw_arm) {
    n += static_cast<std::size_t>(c.P_attempted);
  }
  return n;
}

std::size_t HorseRaceReport::windows_skipped() const {
  std::size_t n = 0;
  for (const auto& row : grid.cells) {
    for (const auto& c : row) {
      n += static_cast<std::size_t>(c.P_attempted - c.P_effective);
    }
  }
  for (const auto& c : rw_arm) {
    n += static_cast<std::size_t>(c.P_attempted - c.P_effective);
  }
  return n;
}

HorseRaceReport run_horse_race(const Panel& panel, const EvaluationConfig& config) {
  if (config.window_grid.empty()) {
    throw ConfigError("window grid is empty");
  }
  if (!std::is_sorted(config.window_grid.begin(), config.window_grid.end()) ||
      std::adjacent_find(config.window_grid.begin(), config.window_grid.end()) !=
          config.window_grid.end()) {
    throw ConfigError("window grid must be strictly ascending");
  }
  if (config.window_grid.back() >= static_cast<int>(panel.T())) {
    throw ConfigError("window length " + std::to_string(config.window_grid.back()) +
                      " is not below T=" + std::to_string(panel.T()));
  }

  // The noise covariate is drawn once, from the real covariates only.
  const std::vector<std::string> reserved{kNoiseCovariate};
  const Panel real = panel.without_covariates(reserved);
  const Panel race = real.with_covariate(make_noise_covariate(real, config.seed));

  HorseRaceReport report;
  report.T = panel.T();
  report.seed = config.seed;
  report.grid.windows = config.window_grid;
  for (const auto& c : real.covariates()) {
    report.grid.covariates.push_back(c.name());
  }
  report.grid.covariates.push_back(kNoiseCovariate);

  std::vector<Task> tasks;
  for (const auto& name : report.grid.covariates) {
    for (int R : config.window_grid) {
      tasks.push_back({name, R});
    }
  }
  for (int R : config.window_grid) {
    tasks.push_back({"", R});
  }
  // Longest-running arms first keeps the pool busy until the end.
  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tasks[a].covariate.empty() < tasks[b].covariate.empty();
  });

  std::vector<SplitSummary> summaries(tasks.size());
  parallel_for(order.size(), config.jobs, [&](std::size_t k) {
    const auto& task = tasks[order[k]];
    const auto windows = rolling_cv(race, task.covariate, task.R, config);
    summaries[order[k]] = summarize_split(windows, task.covariate, task.R);
  });

  const std::size_t s = config.window_grid.size();
  const std::size_t n_cov = report.grid.covariates.size();
  report.grid.cells.assign(n_cov, {});
  for (std::size_t c = 0; c < n_cov; ++c) {
    report.grid.cells[c].assign(summaries.begin() + static_cast<std::ptrdiff_t>(c * s),
                                summaries.begin() + static_cast<std::ptrdiff_t>((c + 1) * s));
  }
  report.rw_arm.assign(summaries.begin() + static_cast<std::ptrdiff_t>(n_cov * s), summaries.end());

  const std::size_t rand_row = n_cov - 1;
  for (std::size_t v = 0; v < s; ++v) {
    const auto& noise = report.grid.cells[rand_row][v];
    for (std::size_t c = 0; c < n_cov; ++c) {
      auto& cell = report.grid.cells[c][v];
      cell.outperformed_rw_and_rand =
          c == rand_row ? cell.outperformed_rw : cell.outperformed_rw && cell.msfe < noise.msfe;
    }
  }

  // Information criteria: per-split means averaged over splits.
  report.rw_mean_aic = mean_finite(report.rw_arm, &SplitSummary::mean_aic);
  report.rw_mean_bic = mean_finite(report.rw_arm, &SplitSummary::mean_bic);
  ScoreTable aic_table;
  ScoreTable bic_table;
  for (std::size_t c = 0; c < n_cov; ++c) {
    report.mean_aic.push_back(mean_finite(report.grid.cells[c], &SplitSummary::mean_aic));
    report.mean_bic.push_back(mean_finite(report.grid.cells[c], &SplitSummary::mean_bic));
    aic_table.push_back({report.rw_mean_aic, report.mean_aic.back()});
    bic_table.push_back({report.rw_mean_bic, report.mean_bic.back()});
  }
  report.delta_aic = scale_rows(aic_table);
  report.delta_bic = scale_rows(bic_table);

  {
    std::vector<double> scores;
    std::vector<std::size_t> rows;
    for (std::size_t c = 0; c < n_cov; ++c) {
      if (std::isfinite(report.delta_bic[c][1])) {
        scores.push_back(report.delta_bic[c][1]);
        rows.push_back(c);
      }
    }
    report.bic_rank.assign(n_cov, 0);
    if (!scores.empty()) {
      const auto r = rank(scores, RankDirection::ascending);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        report.bic_rank[rows[k]] = r[k];
      }
    }
  }

  // Split-averaged MSFE difference against the random walk on the same windows.
  for (std::size_t c = 0; c < n_cov; ++c) {
    std::vector<double> diffs;
    for (const auto& cell : report.grid.cells[c]) {
      if (!cell.is_void()) {
        diffs.push_back(cell.msfe - cell.rw_msfe);
      }
    }
    report.delta_msfe.push_back(diffs.empty() ? kNaN : avg_predictability(diffs));
  }

  // Ranks cover the real, non-void covariates.
  {
    std::vector<std::string> names;
    std::vector<double> freq;
    std::vector<double> pred;
    for (std::size_t c = 0; c + 1 < n_cov; ++c) {
      if (!std::isfinite(report.delta_msfe[c])) {
        continue;
      }
      const auto& values = real.covariates()[c].values();
      double total = 0.0;
      for (double v : values) {
        total += v;
      }
      names.push_back(report.grid.covariates[c]);
      freq.push_back(total);
      pred.push_back(report.delta_msfe[c]);
    }
    if (!names.empty()) {
      const auto fr = rank(freq, RankDirection::descending);
      const auto pr = rank(pred, RankDirection::ascending);
      for (std::size_t k = 0; k < names.size(); ++k) {
        report.frequency_rank[names[k]] = fr[k];
        report.predictability_rank[names[k]] = pr[k];
      }
      report.rank_difference = horserace::rank_difference(report.frequency_rank, report.predictability_rank);
    }
  }

  report.votes_msfe = mode_vote(report.grid, Metric::msfe);
  report.votes_mae = mode_vote(report.grid, Metric::mae);
  return report;
}

}  // namespace horserace

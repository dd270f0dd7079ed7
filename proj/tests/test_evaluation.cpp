#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "horserace/errors.hpp"
#include "horserace/evaluation.hpp"
#include "oracles.hpp"

using namespace horserace;

namespace {

const Date kStart(2012, 1, 1);

TimeSeries ts(std::vector<double> v, std::string name = "y") { return TimeSeries(std::move(name), kStart, std::move(v)); }

std::vector<double> uniform_vector(std::uint64_t seed, std::size_t n, double lo, double hi) {
  horserace::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

SplitSummary cell(const std::string& name, int R, double m, double a, double rw_m, double rw_a) {
  SplitSummary s;
  s.covariate_name = name;
  s.R = R;
  s.P_attempted = s.P_effective = 10;
  s.msfe = m;
  s.mae = a;
  s.rw_msfe = rw_m;
  s.rw_mae = rw_a;
  return s;
}

// Random walk with a weakly predictive covariate.
Panel small_panel(std::uint64_t seed, std::size_t T) {
  const auto x = oracle::white_noise(seed, T);
  const auto z = oracle::white_noise(seed + 1, T);
  const auto e = oracle::white_noise(seed + 2, T);
  std::vector<double> y(T, 1.0);
  for (std::size_t t = 1; t < T; ++t) y[t] = y[t - 1] + 0.01 * (0.5 * x[t - 1] + e[t]);
  return Panel(ts(y, "value"), {ts(x, "signal"), ts(z, "other")});
}

}  // namespace

TEST_CASE("loss metrics") {
  CHECK(msfe(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(mae(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(msfe(std::vector<double>{0, 0}, std::vector<double>{1, -1}) == 1.0);
  CHECK(mae(std::vector<double>{0, 0}, std::vector<double>{1, -1}) == 1.0);
  CHECK_THROWS_AS(msfe(std::vector<double>{}, std::vector<double>{}), InputError);
  CHECK_THROWS_AS(mae(std::vector<double>{1}, std::vector<double>{1, 2}), InputError);

  for (int s = 0; s < 20; ++s) {
    const auto f = uniform_vector(100 + s, 100, -3, 3);
    const auto a = uniform_vector(200 + s, 100, -3, 3);
    const double m = msfe(f, a);
    const double b = mae(f, a);
    CHECK(std::fabs(m - oracle::msfe(f, a)) <= 1e-12);
    CHECK(std::fabs(b - oracle::mae(f, a)) <= 1e-12);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      lo = std::min(lo, std::fabs(a[i] - f[i]));
      hi = std::max(hi, std::fabs(a[i] - f[i]));
    }
    CHECK(m >= b * lo);
    CHECK(m <= b * hi);
  }
}

TEST_CASE("delta scaling") {
  CHECK(delta_scale({{2.5, 2.5}, {2.5, 2.5}}) == ScoreTable{{0, 0}, {0, 0}});
  const ScoreTable t{{5.0, 3.0}, {4.0, 9.5}, {3.5, 7.25}};
  const auto d = delta_scale(t);
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& row : d) for (double v : row) mn = std::min(mn, v);
  CHECK(mn == 0.0);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t[i].size(); ++j) CHECK(d[i][j] == t[i][j] - 3.0);
  CHECK_THROWS_AS(delta_scale({{1.0, NAN}}), InputError);
  CHECK_THROWS(delta_scale({}));
}

TEST_CASE("noise covariate") {
  const Panel p(ts(oracle::random_walk(1, 50), "value"),
                {ts(uniform_vector(2, 50, 0, 10), "a"), ts(uniform_vector(3, 50, 100, 110), "b")});
  std::vector<double> pooled;
  for (const auto& c : p.covariates()) pooled.insert(pooled.end(), c.values().begin(), c.values().end());
  std::sort(pooled.begin(), pooled.end());

  const auto r = make_noise_covariate(p, 7);
  CHECK(r.name() == kNoiseCovariate);
  CHECK(r.size() == p.T());
  CHECK(r.start() == p.target().start());
  for (double v : r.values()) CHECK(std::binary_search(pooled.begin(), pooled.end(), v));
  CHECK(make_noise_covariate(p, 7) == r);
  CHECK_FALSE(make_noise_covariate(p, 8) == r);

  // An existing noise column is not part of the pool.
  const Panel with_rand(p.target(), {p.covariates()[0], p.covariates()[1], ts(std::vector<double>(50, -1e6), kNoiseCovariate)});
  for (double v : make_noise_covariate(with_rand, 7).values()) CHECK(v > -1e6);

  double sum = 0.0;
  const int reps = 10000;
  for (int k = 0; k < reps; ++k) sum += oracle::mean(make_noise_covariate(p, 1000 + k).values());
  const double pooled_mean = oracle::mean(pooled);
  double var = 0.0;
  for (double v : pooled) var += (v - pooled_mean) * (v - pooled_mean);
  var /= pooled.size();
  const double se = std::sqrt(var / (50.0 * reps));
  CHECK(std::fabs(sum / reps - pooled_mean) <= 2.0 * se);

  CHECK_THROWS(make_noise_covariate(Panel(p.target(), {}), 1));
}

TEST_CASE("split-averaged predictability") {
  CHECK(avg_predictability(std::vector<double>(32, -0.25)) == -0.25);
  CHECK(avg_predictability(std::vector<double>{-1.0, 1.0}) == 0.0);
  const auto v = uniform_vector(5, 32, -1e-5, 1e-5);
  CHECK(std::fabs(avg_predictability(v) - oracle::mean(v)) <= 1e-18);
  CHECK_THROWS(avg_predictability(std::vector<double>{}));
  CHECK(avg_predictability(std::vector<double>(32, 0.0)) == 0.0);
}

TEST_CASE("rank difference") {
  const auto d = rank_difference({{"risk", 16}, {"Euro", 1}, {"SP", 3}}, {{"risk", 1}, {"Euro", 17}, {"SP", 3}});
  CHECK(d.at("risk") == -15);
  CHECK(d.at("Euro") == 16);
  CHECK(d.at("SP") == 0);
  CHECK_THROWS_AS(rank_difference({{"a", 1}}, {{"b", 1}}), InputError);
}

TEST_CASE("mode vote against a brute-force oracle") {
  for (int s = 0; s < 50; ++s) {
    const std::vector<int> windows{310, 320, 330, 340, 350, 360, 370, 380};
    SplitGrid g;
    g.windows = windows;
    g.covariates = {"a", "b", "c", "d", kNoiseCovariate};
    horserace::Rng rng(900 + s);
    std::vector<std::vector<double>> m(5), rw(5), a(5), rwa(5);
    for (std::size_t c = 0; c < 5; ++c) {
      std::vector<SplitSummary> row;
      for (int R : windows) {
        // Coarse values so ties happen.
        m[c].push_back(std::round(rng.uniform(0, 4)));
        rw[c].push_back(std::round(rng.uniform(0, 4)));
        a[c].push_back(std::round(rng.uniform(0, 4)));
        rwa[c].push_back(std::round(rng.uniform(0, 4)));
        row.push_back(cell(g.covariates[c], R, m[c].back(), a[c].back(), rw[c].back(), rwa[c].back()));
      }
      g.cells.push_back(row);
    }
    const auto vm = mode_vote(g, Metric::msfe);
    const auto va = mode_vote(g, Metric::mae);
    const auto om = oracle::votes(m, rw);
    const auto oa = oracle::votes(a, rwa);
    for (std::size_t c = 0; c < 5; ++c) {
      CHECK(vm.by_covariate.at(g.covariates[c]) == om[c]);
      CHECK(va.by_covariate.at(g.covariates[c]) == oa[c]);
    }
    for (std::size_t v = 0; v < windows.size(); ++v) {
      int count = 0;
      for (std::size_t c = 0; c < 4; ++c) count += m[c][v] < rw[c][v] && m[c][v] < m[4][v];
      CHECK(vm.by_window.at(windows[v]) == count);
    }

    // Improving one cell never lowers that covariate's count.
    auto better = g;
    better.cells[1][3].msfe = -1.0;
    CHECK(mode_vote(better, Metric::msfe).by_covariate.at("b") >= vm.by_covariate.at("b"));
  }

  SplitGrid tie;
  tie.windows = {310};
  tie.covariates = {"x", kNoiseCovariate};
  tie.cells = {{cell("x", 310, 1.0, 1.0, 2.0, 2.0)}, {cell(kNoiseCovariate, 310, 1.0, 1.0, 2.0, 2.0)}};
  CHECK(mode_vote(tie, Metric::msfe).by_covariate.at("x") == 0);
  CHECK(mode_vote(tie, Metric::msfe).by_covariate.at(kNoiseCovariate) == 1);

  SplitGrid no_rand;
  no_rand.windows = {310};
  no_rand.covariates = {"x"};
  no_rand.cells = {{cell("x", 310, 1.0, 1.0, 2.0, 2.0)}};
  CHECK_THROWS_AS(mode_vote(no_rand, Metric::msfe), ConfigError);
}

TEST_CASE("split summaries") {
  std::vector<WindowResult> w(4);
  const double f[] = {1.0, 2.0, 3.0, 4.0};
  const double a[] = {1.5, 2.0, 2.0, 9.0};
  for (int i = 0; i < 4; ++i) {
    w[i].origin_index = 9 + i;
    w[i].forecast = f[i];
    w[i].actual = a[i];
    w[i].rw_forecast = 0.0;
    w[i].aic = 10.0 * i;
    w[i].bic = 20.0 * i;
  }
  w[3].skipped = true;
  w[3].skip_reason = "ljung_box";
  const auto s = summarize_split(w, "x", 10);
  CHECK(s.P_attempted == 4);
  CHECK(s.P_effective == 3);
  CHECK(s.skip_rate() == 0.25);
  CHECK(s.msfe == doctest::Approx((0.25 + 0.0 + 1.0) / 3.0));
  CHECK(s.mae == doctest::Approx(1.5 / 3.0));
  CHECK(s.rw_msfe == doctest::Approx((2.25 + 4.0 + 4.0) / 3.0));
  CHECK(s.mean_aic == doctest::Approx(10.0));
  CHECK(s.outperformed_rw);
  CHECK(s.forecast_errors == std::vector<double>{0.5, 0.0, -1.0});
  REQUIRE(s.skips.size() == 1);
  CHECK(s.skips[0].origin_index == 12);

  for (auto& x : w) x.skipped = true;
  const auto v = summarize_split(w, "x", 10);
  CHECK(v.is_void());
  CHECK(std::isnan(v.msfe));
  CHECK_FALSE(v.outperformed_rw);
}

TEST_CASE("rolling-origin accounting") {
  const auto p = small_panel(11, 636);
  EvaluationConfig cfg;
  cfg.seed = 3;
  const auto rw = rolling_cv(p, "", 530, cfg);
  CHECK(rw.size() == 106);
  CHECK(rw.front().origin_index == 529);
  CHECK(rw.back().origin_index == 634);
  for (const auto& w : rw) {
    CHECK(w.forecast == p.target()[static_cast<std::size_t>(w.origin_index)]);
    CHECK(w.actual == p.target()[static_cast<std::size_t>(w.origin_index) + 1]);
    CHECK_FALSE(w.skipped);
  }
  CHECK(rolling_cv(p, "", 635, cfg).size() == 1);
  CHECK_THROWS_AS(rolling_cv(p, "", 636, cfg), ConfigError);
  CHECK_THROWS_AS(rolling_cv(p, "missing", 300, cfg), ConfigError);

  const auto q = small_panel(12, 200);
  const auto cov = rolling_cv(q, "signal", 180, cfg);
  CHECK(cov.size() == 20);
  for (const auto& w : cov) {
    CHECK(w.rw_forecast == q.target()[static_cast<std::size_t>(w.origin_index)]);
    CHECK(w.covariate_name == "signal");
  }
  const auto s = summarize_split(cov, "signal", 180);
  CHECK(s.P_attempted == 20);
  CHECK(s.P_effective + static_cast<int>(s.skips.size()) == 20);

  // Noise covariate drawn on demand is the same one make_noise_covariate gives.
  const auto drawn = rolling_cv(q, kNoiseCovariate, 190, cfg);
  const Panel with(q.target(), {q.covariates()[0], q.covariates()[1], make_noise_covariate(q, cfg.seed)});
  const auto given = rolling_cv(with, kNoiseCovariate, 190, cfg);
  REQUIRE(drawn.size() == given.size());
  for (std::size_t i = 0; i < drawn.size(); ++i) CHECK(drawn[i].forecast == given[i].forecast);
}

TEST_CASE("window seeds are stable and distinct") {
  CHECK(window_seed(42, "signal", 310, 400) == window_seed(42, "signal", 310, 400));
  CHECK(window_seed(42, "signal", 310, 400) != window_seed(42, "signal", 310, 401));
  CHECK(window_seed(42, "signal", 310, 400) != window_seed(42, "other", 310, 400));
  CHECK(window_seed(42, "signal", 310, 400) != window_seed(43, "signal", 310, 400));
}

TEST_CASE("horse race assembly") {
  const auto p = small_panel(21, 160);
  EvaluationConfig cfg;
  cfg.seed = 5;
  cfg.window_grid = {120, 130, 140};
  const auto rep = run_horse_race(p, cfg);
  CHECK(rep.T == 160);
  CHECK(rep.grid.covariates == std::vector<std::string>{"signal", "other", kNoiseCovariate});
  REQUIRE(rep.grid.cells.size() == 3);
  for (const auto& row : rep.grid.cells) {
    REQUIRE(row.size() == 3);
    for (const auto& c : row) CHECK(c.P_attempted == 160 - c.R);
  }
  REQUIRE(rep.rw_arm.size() == 3);
  CHECK(rep.windows_attempted() == 4 * (40 + 30 + 20));

  for (const auto* table : {&rep.delta_aic, &rep.delta_bic}) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& row : *table) {
      REQUIRE(row.size() == 2);
      for (double v : row) mn = std::min(mn, v);
    }
    CHECK(mn == 0.0);
    // The benchmark column is one constant.
    for (const auto& row : *table) CHECK(row[0] == (*table)[0][0]);
  }
  for (const auto& [name, n] : rep.votes_msfe.by_covariate) {
    CHECK(n >= 0);
    CHECK(n <= 3);
  }
  for (const auto& [R, n] : rep.votes_msfe.by_window) {
    CHECK(n >= 0);
    CHECK(n <= 2);
  }
  CHECK(rep.votes_msfe.by_covariate == mode_vote(rep.grid, Metric::msfe).by_covariate);
  CHECK(rep.frequency_rank.size() == 2);
  CHECK(rep.predictability_rank.size() == 2);

  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> deltas;
    for (const auto& cellv : rep.grid.cells[c]) deltas.push_back(cellv.msfe - cellv.rw_msfe);
    CHECK(rep.delta_msfe[c] == doctest::Approx(oracle::mean(deltas)).epsilon(1e-12));
  }

  // Supplying the noise covariate drawn with the run seed changes nothing.
  const Panel with(p.target(), {p.covariates()[0], p.covariates()[1], make_noise_covariate(p, cfg.seed)});
  const auto again = run_horse_race(with, cfg);
  CHECK(again.delta_msfe == rep.delta_msfe);
  CHECK(again.votes_mae.by_covariate == rep.votes_mae.by_covariate);
  CHECK(again.delta_aic == rep.delta_aic);

  cfg.jobs = 3;
  const auto threaded = run_horse_race(p, cfg);
  CHECK(threaded.delta_msfe == rep.delta_msfe);
  CHECK(threaded.delta_bic == rep.delta_bic);

  cfg.window_grid = {130, 120};
  CHECK_THROWS_AS(run_horse_race(p, cfg), ConfigError);
  cfg.window_grid = {120, 160};
  CHECK_THROWS_AS(run_horse_race(p, cfg), ConfigError);
}

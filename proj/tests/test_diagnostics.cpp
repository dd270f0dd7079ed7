#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "horserace/diagnostics.hpp"
#include "horserace/errors.hpp"
#include "oracles.hpp"

using namespace horserace;

namespace {

const Date kStart(2012, 1, 1);

TimeSeries ts(std::vector<double> v, std::string name = "x") { return TimeSeries(std::move(name), kStart, std::move(v)); }

}  // namespace

TEST_CASE("Ljung-Box matches the direct formula") {
  const std::vector<double> alt{1, -1, 1, -1, 1, -1, 1, -1};
  const auto r = ljung_box(alt, 1);
  CHECK(r.statistic == doctest::Approx(oracle::ljung_box_q(alt, 1)).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(oracle::chi2_1_sf(oracle::ljung_box_q(alt, 1))).epsilon(1e-10));
  CHECK(r.p_value < 0.05);
  CHECK(r.lags_or_df == 1);

  const auto x = oracle::white_noise(3, 300);
  std::vector<double> affine;
  for (double v : x) affine.push_back(-3.0 * v + 11.0);
  CHECK(ljung_box(x, 10).statistic == doctest::Approx(ljung_box(affine, 10).statistic).epsilon(1e-10));
  CHECK(ljung_box(x, 10).statistic == doctest::Approx(oracle::ljung_box_q(x, 10)).epsilon(1e-10));
  CHECK(ljung_box(x, 10, 3).lags_or_df == 7);
  CHECK(ljung_box(x, 2, 5).lags_or_df == 1);

  CHECK_THROWS_AS(ljung_box(std::vector<double>(50, 1.0), 5), VarianceError);
  CHECK_THROWS(ljung_box(x, 0));
  CHECK_THROWS(ljung_box(std::vector<double>{1, 2, 3}, 3));
  CHECK(default_lb_lags(500) == 10);
  CHECK(default_lb_lags(30) == 6);
  CHECK(default_lb_lags(3) == 1);
}

TEST_CASE("Ljung-Box size and power") {
  int rejected = 0;
  for (int s = 0; s < 2000; ++s) rejected += ljung_box(oracle::white_noise(10000 + s, 500), 10).p_value < 0.05;
  CHECK(rejected >= 60);
  CHECK(rejected <= 140);

  int strong = 0;
  for (int s = 0; s < 200; ++s) strong += ljung_box(oracle::simulate_ar1(20000 + s, 500, 0.8), 10).p_value < 0.01;
  CHECK(strong >= 198);
}

TEST_CASE("KPSS separates random walks from stationary series") {
  int rw_reject = 0;
  int rw_floor = 0;
  int ar_keep = 0;
  int ar_ceiling = 0;
  for (int s = 0; s < 200; ++s) {
    const auto rw = kpss(oracle::random_walk(30000 + s, 500));
    const auto ar = kpss(oracle::simulate_ar1(31000 + s, 500, 0.5));
    rw_reject += rw.p_value < 0.05;
    rw_floor += rw.p_value == 0.01;
    ar_keep += ar.p_value >= 0.05;
    ar_ceiling += ar.p_value == 0.10;
    CHECK(rw.p_value >= 0.01);
    CHECK(ar.p_value <= 0.10);
  }
  CHECK(rw_reject >= 180);
  CHECK(ar_keep >= 180);
  CHECK(rw_floor >= 180);
  // The clamped non-rejection value is reached in ~85% of draws with the
  // short bandwidth rule; see the README for the trade-off.
  CHECK(ar_ceiling >= 160);

  const auto nw = kpss(oracle::random_walk(5, 500), KpssBandwidth::newey_west);
  CHECK(nw.p_value >= 0.01);
  CHECK(nw.p_value <= 0.10);
  CHECK(kpss(oracle::white_noise(1, 500)).lags_or_df == 5);  // trunc(4 * 5^0.25)
  CHECK_THROWS_AS(kpss(oracle::white_noise(1, 20)), LengthError);
}

TEST_CASE("ADF and Phillips-Perron") {
  int adf_rw_keep = 0;
  int adf_wn_reject = 0;
  int agree = 0;
  for (int s = 0; s < 200; ++s) {
    const auto rw = oracle::random_walk(40000 + s, 500);
    const auto wn = oracle::white_noise(41000 + s, 500);
    const auto a_rw = adf(rw);
    const auto a_wn = adf(wn);
    adf_rw_keep += a_rw.p_value > 0.10;
    adf_wn_reject += a_wn.p_value < 0.05;
    const bool pp_rw = phillips_perron(rw).p_value < 0.05;
    const bool pp_wn = phillips_perron(wn).p_value < 0.05;
    agree += (pp_rw == (a_rw.p_value < 0.05)) && (pp_wn == (a_wn.p_value < 0.05));
    CHECK(a_rw.p_value >= 0.01);
    CHECK(a_rw.p_value <= 0.99);
  }
  CHECK(adf_rw_keep >= 170);
  CHECK(adf_wn_reject >= 190);
  CHECK(agree >= 170);
  CHECK(adf(oracle::random_walk(1, 500), AdfLagPolicy::aic).lags_or_df <= 7);
  CHECK(adf(oracle::random_walk(1, 500)).lags_or_df == 7);
  CHECK_THROWS_AS(adf(oracle::white_noise(1, 20)), LengthError);
  CHECK_THROWS_AS(phillips_perron(oracle::white_noise(1, 20)), LengthError);
}

TEST_CASE("White neural-network test") {
  const auto ar = oracle::simulate_ar1(50, 500, 0.5);
  const auto a = white_nn_test(ar, 2, 99);
  const auto b = white_nn_test(ar, 2, 99);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
  CHECK(a.lags_or_df == 2);

  int rejected = 0;
  for (int s = 0; s < 1000; ++s) {
    rejected += white_nn_test(oracle::simulate_ar1(51000 + s, 500, 0.5), 2, s).p_value < 0.05;
  }
  CHECK(rejected >= 20);
  CHECK(rejected <= 90);

  int found = 0;
  for (int s = 0; s < 100; ++s) {
    horserace::Rng rng(52000 + s);
    std::vector<double> y(600, 0.0);
    for (std::size_t t = 1; t < y.size(); ++t) {
      const double l = y[t - 1];
      y[t] = 0.8 * l * l / (1.0 + 0.25 * l * l) + rng.normal();
    }
    found += white_nn_test(std::vector<double>(y.begin() + 100, y.end()), 2, s).p_value < 0.05;
  }
  CHECK(found >= 80);
  CHECK_THROWS_AS(white_nn_test(oracle::white_noise(1, 40)), LengthError);
}

TEST_CASE("Breusch-Pagan") {
  int rejected = 0;
  for (int s = 0; s < 1000; ++s) rejected += breusch_pagan(oracle::white_noise(60000 + s, 500)).p_value < 0.05;
  CHECK(rejected >= 20);
  CHECK(rejected <= 80);

  int found = 0;
  for (int s = 0; s < 200; ++s) {
    auto e = oracle::white_noise(61000 + s, 500);
    for (std::size_t t = 0; t < e.size(); ++t) e[t] *= 0.2 + 2.0 * static_cast<double>(t) / 500.0;
    found += breusch_pagan(e).p_value < 0.05;
  }
  CHECK(found >= 180);

  // Differences mode: a random walk whose increments fan out.
  auto inc = oracle::white_noise(62, 500);
  std::vector<double> walk(500, 0.0);
  for (std::size_t t = 1; t < 500; ++t) walk[t] = walk[t - 1] + inc[t] * (0.2 + 2.0 * t / 500.0);
  CHECK(breusch_pagan(ts(walk), BreuschPaganInput::differences).p_value < 0.05);
  CHECK_THROWS_AS(breusch_pagan(std::vector<double>(100, 3.0)), VarianceError);
  CHECK_THROWS_AS(breusch_pagan(std::vector<double>(10, 3.0)), LengthError);
}

TEST_CASE("variance inflation factors") {
  const std::vector<TimeSeries> indep{ts(oracle::white_noise(70, 1000), "a"), ts(oracle::white_noise(71, 1000), "b")};
  for (double v : vif(indep)) {
    CHECK(v >= 1.0);
    CHECK(v < 1.1);
  }

  // Centred, mutually orthogonal columns.
  std::vector<double> u;
  std::vector<double> w;
  for (int i = 0; i < 400; ++i) {
    u.push_back(i % 2 == 0 ? 1.0 : -1.0);
    w.push_back(i % 4 < 2 ? 1.0 : -1.0);
  }
  const std::vector<TimeSeries> ortho{ts(u, "u"), ts(w, "w")};
  for (double v : vif(ortho)) CHECK(std::fabs(v - 1.0) < 1e-8);

  auto x = oracle::white_noise(72, 500);
  std::vector<double> twice;
  std::vector<double> near;
  const auto small = oracle::white_noise(73, 500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    twice.push_back(2.0 * x[i]);
    near.push_back(x[i] + 0.05 * small[i]);
  }
  const std::vector<TimeSeries> collinear{ts(x, "x"), ts(twice, "2x")};
  CHECK(std::isinf(vif(collinear)[0]));
  const std::vector<TimeSeries> close{ts(x, "x"), ts(near, "x+e")};
  CHECK(vif(close)[0] > 10.0);
  const std::vector<TimeSeries> single{ts(x, "x")};
  CHECK_THROWS(vif(single));
}

TEST_CASE("Bonferroni adjustment") {
  const std::vector<double> raw{0.554, 0.004, 0.0, 1.0};
  const auto adj = bonferroni_adjust(raw, 32);
  CHECK(adj[0] == 1.0);
  CHECK(adj[1] == doctest::Approx(0.128).epsilon(1e-12));
  CHECK(adj[2] == 0.0);
  CHECK(adj[3] == 1.0);
  const auto same = bonferroni_adjust(raw, 4);
  CHECK(same[0] == 1.0);
  const std::vector<double> sorted{0.001, 0.01, 0.02, 0.3};
  const auto mono = bonferroni_adjust(sorted, 10);
  CHECK(std::is_sorted(mono.begin(), mono.end()));
  CHECK(bonferroni_adjust(sorted, 4)[2] == doctest::Approx(0.08));
  const std::vector<double> one{0.37};
  CHECK(bonferroni_adjust(one, 1)[0] == 0.37);
  const std::vector<double> bad{1.2};
  CHECK_THROWS_AS(bonferroni_adjust(bad, 3), InputError);
  CHECK_THROWS(bonferroni_adjust(raw, 2));
}

TEST_CASE("normal Q-Q data") {
  int inside_ok = 0;
  int heavy_out = 0;
  for (int s = 0; s < 50; ++s) {
    const auto z = oracle::white_noise(80000 + s, 1000);
    const auto q = qq_data(z);
    int inside = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      inside += q.sample_quantiles[i] >= q.band_lower[i] && q.sample_quantiles[i] <= q.band_upper[i];
    }
    inside_ok += inside >= 900;

    horserace::Rng rng(81000 + s);
    std::vector<double> t2;
    for (int i = 0; i < 1000; ++i) t2.push_back(rng.normal() / std::sqrt(-std::log(1.0 - rng.uniform())));
    const auto h = qq_data(t2);
    const std::size_t last = t2.size() - 1;
    heavy_out += h.sample_quantiles[0] < h.band_lower[0] || h.sample_quantiles[last] > h.band_upper[last];
  }
  CHECK(inside_ok >= 45);
  CHECK(heavy_out >= 45);

  auto x = oracle::white_noise(9, 50);
  auto shuffled = x;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 7, shuffled.end());
  const auto a = qq_data(x);
  const auto b = qq_data(shuffled);
  CHECK(a.sample_quantiles == b.sample_quantiles);
  CHECK(a.band_upper == b.band_upper);
  CHECK(std::is_sorted(a.sample_quantiles.begin(), a.sample_quantiles.end()));
  CHECK(a.theoretical_quantiles[0] == doctest::Approx(-2.3263478740408408).epsilon(1e-9));  // z(0.01)
  CHECK_THROWS_AS(qq_data(std::vector<double>(5, 1.0)), LengthError);
}

TEST_CASE("diagnostic battery") {
  int clean = 0;
  for (int s = 0; s < 1000; ++s) {
    BatteryConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    clean += !run_battery(oracle::white_noise(90000 + s, 300), cfg).anomaly;
  }
  CHECK(clean >= 970);

  int flagged = 0;
  for (int s = 0; s < 200; ++s) flagged += run_battery(oracle::random_walk(91000 + s, 300)).anomaly;
  CHECK(flagged >= 180);

  const auto b = run_battery(oracle::random_walk(3, 300));
  CHECK_FALSE(b.anomaly_reason.empty());
  for (const auto* r : {&b.ljung_box, &b.kpss, &b.adf, &b.phillips_perron, &b.white_nn}) {
    CHECK(r->p_value >= 0.0);
    CHECK(r->p_value <= 1.0);
  }
  CHECK_THROWS(run_battery(std::vector<double>{}));
}

#include "horserace/app/report_io.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <sstream>

#include "horserace/errors.hpp"

namespace horserace::app {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// JSON has no NaN; void cells are written as null and read back as NaN.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string cell(double v, int digits = 8) {
  return std::isfinite(v) ? fmt::format("{:.{}g}", v, digits) : "NA";
}
std::string fixed(double v, int decimals) {
  return std::isfinite(v) ? fmt::format("{:.{}f}", v, decimals) : "NA";
}

json test_to_json(const TestResult& t) {
  return {{"test", t.test_name}, {"statistic", num(t.statistic)}, {"p_value", num(t.p_value)},
          {"lags_or_df", t.lags_or_df}};
}
TestResult test_from_json(const json& j) {
  return {j.at("test").get<std::string>(), num(j.at("statistic")), num(j.at("p_value")),
          j.at("lags_or_df").get<int>()};
}

json split_to_json(const SplitSummary& s) {
  json skips = json::array();
  for (const auto& k : s.skips) {
    skips.push_back({{"origin_index", k.origin_index}, {"reason", k.reason}});
  }
  json errors = json::array();
  for (double e : s.forecast_errors) {
    errors.push_back(num(e));
  }
  return {{"covariate", s.covariate_name},
          {"R", s.R},
          {"P_attempted", s.P_attempted},
          {"P_effective", s.P_effective},
          {"msfe", num(s.msfe)},
          {"mae", num(s.mae)},
          {"rw_msfe", num(s.rw_msfe)},
          {"rw_mae", num(s.rw_mae)},
          {"mean_aic", num(s.mean_aic)},
          {"mean_bic", num(s.mean_bic)},
          {"outperformed_rw", s.outperformed_rw},
          {"outperformed_rw_and_rand", s.outperformed_rw_and_rand},
          {"forecast_errors", errors},
          {"skips", skips}};
}

SplitSummary split_from_json(const json& j) {
  SplitSummary s;
  s.covariate_name = j.at("covariate").get<std::string>();
  s.R = j.at("R").get<int>();
  s.P_attempted = j.at("P_attempted").get<int>();
  s.P_effective = j.at("P_effective").get<int>();
  s.msfe = num(j.at("msfe"));
  s.mae = num(j.at("mae"));
  s.rw_msfe = num(j.at("rw_msfe"));
  s.rw_mae = num(j.at("rw_mae"));
  s.mean_aic = num(j.at("mean_aic"));
  s.mean_bic = num(j.at("mean_bic"));
  s.outperformed_rw = j.at("outperformed_rw").get<bool>();
  s.outperformed_rw_and_rand = j.at("outperformed_rw_and_rand").get<bool>();
  for (const auto& e : j.at("forecast_errors")) {
    s.forecast_errors.push_back(num(e));
  }
  for (const auto& k : j.at("skips")) {
    s.skips.push_back({k.at("origin_index").get<int>(), k.at("reason").get<std::string>()});
  }
  return s;
}

json table_to_json(const ScoreTable& t) {
  json out = json::array();
  for (const auto& row : t) {
    json r = json::array();
    for (double v : row) {
      r.push_back(num(v));
    }
    out.push_back(r);
  }
  return out;
}
ScoreTable table_from_json(const json& j) {
  ScoreTable t;
  for (const auto& row : j) {
    std::vector<double> r;
    for (const auto& v : row) {
      r.push_back(num(v));
    }
    t.push_back(std::move(r));
  }
  return t;
}

json votes_to_json(const ModeVotes& v) {
  json by_window = json::array();
  for (const auto& [R, n] : v.by_window) {
    by_window.push_back({R, n});
  }
  return {{"by_covariate", v.by_covariate}, {"by_window", by_window}};
}
ModeVotes votes_from_json(const json& j) {
  ModeVotes v;
  v.by_covariate = j.at("by_covariate").get<std::map<std::string, int>>();
  for (const auto& pair : j.at("by_window")) {
    v.by_window[pair.at(0).get<int>()] = pair.at(1).get<int>();
  }
  return v;
}

json report_to_json(const HorseRaceReport& r) {
  json cells = json::array();
  for (const auto& row : r.grid.cells) {
    json jr = json::array();
    for (const auto& c : row) {
      jr.push_back(split_to_json(c));
    }
    cells.push_back(jr);
  }
  json rw = json::array();
  for (const auto& c : r.rw_arm) {
    rw.push_back(split_to_json(c));
  }
  json mean_aic = json::array();
  json mean_bic = json::array();
  json delta_msfe = json::array();
  for (std::size_t i = 0; i < r.mean_aic.size(); ++i) {
    mean_aic.push_back(num(r.mean_aic[i]));
    mean_bic.push_back(num(r.mean_bic[i]));
    delta_msfe.push_back(num(r.delta_msfe[i]));
  }
  return {{"T", r.T},
          {"seed", r.seed},
          {"windows", r.grid.windows},
          {"covariates", r.grid.covariates},
          {"cells", cells},
          {"rw_arm", rw},
          {"mean_aic", mean_aic},
          {"mean_bic", mean_bic},
          {"rw_mean_aic", num(r.rw_mean_aic)},
          {"rw_mean_bic", num(r.rw_mean_bic)},
          {"delta_aic", table_to_json(r.delta_aic)},
          {"delta_bic", table_to_json(r.delta_bic)},
          {"bic_rank", r.bic_rank},
          {"delta_msfe", delta_msfe},
          {"predictability_rank", r.predictability_rank},
          {"frequency_rank", r.frequency_rank},
          {"rank_difference", r.rank_difference},
          {"votes_msfe", votes_to_json(r.votes_msfe)},
          {"votes_mae", votes_to_json(r.votes_mae)}};
}

HorseRaceReport report_from_json(const json& j) {
  HorseRaceReport r;
  r.T = j.at("T").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.grid.windows = j.at("windows").get<std::vector<int>>();
  r.grid.covariates = j.at("covariates").get<std::vector<std::string>>();
  for (const auto& row : j.at("cells")) {
    std::vector<SplitSummary> cells;
    for (const auto& c : row) {
      cells.push_back(split_from_json(c));
    }
    r.grid.cells.push_back(std::move(cells));
  }
  for (const auto& c : j.at("rw_arm")) {
    r.rw_arm.push_back(split_from_json(c));
  }
  for (const auto& v : j.at("mean_aic")) {
    r.mean_aic.push_back(num(v));
  }
  for (const auto& v : j.at("mean_bic")) {
    r.mean_bic.push_back(num(v));
  }
  for (const auto& v : j.at("delta_msfe")) {
    r.delta_msfe.push_back(num(v));
  }
  r.rw_mean_aic = num(j.at("rw_mean_aic"));
  r.rw_mean_bic = num(j.at("rw_mean_bic"));
  r.delta_aic = table_from_json(j.at("delta_aic"));
  r.delta_bic = table_from_json(j.at("delta_bic"));
  r.bic_rank = j.at("bic_rank").get<std::vector<int>>();
  r.predictability_rank = j.at("predictability_rank").get<std::map<std::string, int>>();
  r.frequency_rank = j.at("frequency_rank").get<std::map<std::string, int>>();
  r.rank_difference = j.at("rank_difference").get<std::map<std::string, int>>();
  r.votes_msfe = votes_from_json(j.at("votes_msfe"));
  r.votes_mae = votes_from_json(j.at("votes_mae"));
  return r;
}

json preprocess_to_json(const PreprocessLog& log) {
  json entries = json::array();
  for (const auto& e : log.entries) {
    entries.push_back({{"subject", e.subject}, {"action", e.action}, {"reason", e.reason}});
  }
  json out = {{"entries", entries},
              {"removed_covariates", log.removed_covariates},
              {"log_applied", log.log_applied},
              {"breusch_pagan", nullptr}};
  if (log.breusch_pagan) {
    out["breusch_pagan"] = test_to_json(*log.breusch_pagan);
  }
  return out;
}

PreprocessLog preprocess_from_json(const json& j) {
  PreprocessLog log;
  for (const auto& e : j.at("entries")) {
    log.entries.push_back({e.at("subject").get<std::string>(), e.at("action").get<std::string>(),
                           e.at("reason").get<std::string>()});
  }
  log.removed_covariates = j.at("removed_covariates").get<std::vector<std::string>>();
  log.log_applied = j.at("log_applied").get<bool>();
  if (!j.at("breusch_pagan").is_null()) {
    log.breusch_pagan = test_from_json(j.at("breusch_pagan"));
  }
  return log;
}

class Writer {
 public:
  Writer(std::filesystem::path dir, std::vector<std::string>& written)
      : dir_(std::move(dir)), written_(written) {}

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
      throw IoError("cannot write " + path.string());
    }
    written_.push_back(name);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string>& written_;
};

std::optional<TestResult> try_test(auto&& fn) {
  try {
    return fn();
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string diagnostics_csv(const HorseRaceReport& r, std::size_t row) {
  const auto& cells = r.grid.cells[row];
  const int m = static_cast<int>(r.grid.windows.size());
  std::string out = "out,R,P,mean_residual,LB_raw,LB_adj,KP_raw,KP_adj,WH_raw,WH_adj,variance,skewness,kurtosis\n";
  auto adjusted = [m](const std::optional<TestResult>& t) {
    if (!t) {
      return std::string("NA");
    }
    const double p = t->p_value;
    return fixed(bonferroni_adjust(std::span<const double>(&p, 1), m)[0], 3);
  };
  auto raw = [](const std::optional<TestResult>& t) { return t ? fixed(t->p_value, 3) : std::string("NA"); };
  for (const auto& c : cells) {
    const auto& e = c.forecast_errors;
    const auto lb = try_test([&] { return ljung_box(e, default_lb_lags(e.size())); });
    const auto kp = try_test([&] { return kpss(e); });
    const auto wh = try_test([&] {
      return white_nn_test(e, 2, window_seed(r.seed, c.covariate_name, c.R, -1));
    });
    std::string mean_res = "NA";
    std::string var = "NA";
    std::string skew = "NA";
    std::string kurt = "NA";
    if (e.size() >= 4) {
      const auto mom = moments(e);
      mean_res = fixed(mom.mean, 6);
      var = cell(mom.variance);
      skew = mom.skewness ? cell(*mom.skewness) : "NA";
      kurt = mom.kurtosis ? cell(*mom.kurtosis) : "NA";
    } else if (!e.empty()) {
      mean_res = fixed(mean(e), 6);
    }
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.outperformed_rw ? "+" : "-", c.R,
                       c.P_effective, mean_res, raw(lb), adjusted(lb), raw(kp), adjusted(kp), raw(wh),
                       adjusted(wh), var, skew, kurt);
  }
  return out;
}

}  // namespace

std::string file_stem(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '-' || ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  return out.empty() ? "_" : out;
}

std::string record_to_json(const RunRecord& record) {
  json dropped = record.dropped_dates;
  const json j = {{"config", json::parse(config_to_json(record.config))},
                  {"dropped_dates", dropped},
                  {"preprocess", preprocess_to_json(record.preprocess)},
                  {"report", report_to_json(record.report)}};
  return j.dump(1) + "\n";
}

RunRecord record_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    RunRecord r;
    r.config = parse_config(j.at("config").dump());
    r.dropped_dates = j.at("dropped_dates").get<std::vector<std::string>>();
    r.preprocess = preprocess_from_json(j.at("preprocess"));
    r.report = report_from_json(j.at("report"));
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report file: ") + e.what());
  }
}

RunRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return record_from_json(buffer.str());
}

std::vector<std::string> plot_covariates(const RunRecord& record) {
  const auto& grid = record.report.grid;
  if (!record.config.plot_covariates.empty()) {
    std::vector<std::string> out;
    for (const auto& name : record.config.plot_covariates) {
      if (std::find(grid.covariates.begin(), grid.covariates.end(), name) != grid.covariates.end()) {
        out.push_back(name);
      }
    }
    return out;
  }
  // Two most-voted real covariates, grid order breaking ties.
  std::vector<std::string> names(grid.covariates.begin(), grid.covariates.end() - 1);
  std::stable_sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
    return record.report.votes_msfe.by_covariate.at(a) > record.report.votes_msfe.by_covariate.at(b);
  });
  names.resize(std::min<std::size_t>(2, names.size()));
  return names;
}

std::vector<int> plot_windows(const RunRecord& record) {
  const auto& w = record.report.grid.windows;
  if (!record.config.plot_windows.empty()) {
    std::vector<int> out;
    for (int R : record.config.plot_windows) {
      if (std::find(w.begin(), w.end(), R) != w.end()) {
        out.push_back(R);
      }
    }
    return out;
  }
  std::vector<int> out{w.front(), w[w.size() / 2], w.back()};
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> emit_report(const RunRecord& record, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string());
  }
  std::vector<std::string> written;
  Writer w(out_dir, written);
  const auto& r = record.report;
  const auto& grid = r.grid;
  const std::size_t n_cov = grid.covariates.size();

  w.write("report.json", record_to_json(record));

  {
    std::string csv = "predictor,delta_aic_rw,delta_aic_regarima,delta_bic_rw,delta_bic_regarima,bic_rank\n";
    for (std::size_t c = 0; c < n_cov; ++c) {
      csv += fmt::format("{},{},{},{},{},{}\n", grid.covariates[c], fixed(r.delta_aic[c][0], 2),
                         fixed(r.delta_aic[c][1], 2), fixed(r.delta_bic[c][0], 2), fixed(r.delta_bic[c][1], 2),
                         r.bic_rank[c] > 0 ? std::to_string(r.bic_rank[c]) : "NA");
    }
    w.write("delta_ic.csv", csv);
  }
  {
    std::string csv = "kind,key,msfe_votes,mae_votes\n";
    for (const auto& name : grid.covariates) {
      csv += fmt::format("covariate,{},{},{}\n", name, r.votes_msfe.by_covariate.at(name),
                         r.votes_mae.by_covariate.at(name));
    }
    for (int R : grid.windows) {
      csv += fmt::format("window,{},{},{}\n", R, r.votes_msfe.by_window.at(R), r.votes_mae.by_window.at(R));
    }
    w.write("mode_votes.csv", csv);
  }
  {
    std::string csv = "covariate,delta_msfe,predictive_power,predictability_rank,frequency_rank,rank_difference\n";
    auto lookup = [](const std::map<std::string, int>& m, const std::string& k) {
      const auto it = m.find(k);
      return it == m.end() ? std::string("NA") : std::to_string(it->second);
    };
    for (std::size_t c = 0; c < n_cov; ++c) {
      const auto& name = grid.covariates[c];
      csv += fmt::format("{},{},{},{},{},{}\n", name, cell(r.delta_msfe[c], 10), cell(-r.delta_msfe[c], 10),
                         lookup(r.predictability_rank, name), lookup(r.frequency_rank, name),
                         lookup(r.rank_difference, name));
    }
    w.write("predictability.csv", csv);
  }
  for (std::size_t c = 0; c < n_cov; ++c) {
    w.write("diagnostics_" + file_stem(grid.covariates[c]) + ".csv", diagnostics_csv(r, c));
  }

  std::vector<json> plots_skipped;
  for (const auto& name : plot_covariates(record)) {
    const auto row = static_cast<std::size_t>(
        std::find(grid.covariates.begin(), grid.covariates.end(), name) - grid.covariates.begin());
    for (int R : plot_windows(record)) {
      const auto col = static_cast<std::size_t>(std::find(grid.windows.begin(), grid.windows.end(), R) -
                                                grid.windows.begin());
      const auto& e = grid.cells[row][col].forecast_errors;
      const auto stem = file_stem(name) + "_" + std::to_string(R);
      try {
        const auto qq = qq_data(e);
        std::string csv = "theoretical,sample,band_lower,band_upper\n";
        for (std::size_t i = 0; i < qq.sample_quantiles.size(); ++i) {
          csv += fmt::format("{},{},{},{}\n", cell(qq.theoretical_quantiles[i]), cell(qq.sample_quantiles[i]),
                             cell(qq.band_lower[i]), cell(qq.band_upper[i]));
        }
        w.write("qq_" + stem + ".csv", csv);
      } catch (const Error& ex) {
        plots_skipped.push_back({{"file", "qq_" + stem + ".csv"}, {"reason", ex.what()}});
      }
      try {
        if (e.size() < 3) {
          throw LengthError("fewer than three forecast errors");
        }
        const std::size_t lags = std::min(record.config.acf_lags, e.size() - 1);
        const auto a = acf(e, lags);
        const auto p = pacf(e, lags);
        std::string csv = "lag,acf,pacf,band\n";
        for (std::size_t l = 0; l < lags; ++l) {
          csv += fmt::format("{},{},{},{}\n", l + 1, cell(a.values[l]), cell(p.values[l]), cell(a.band));
        }
        w.write("acf_pacf_" + stem + ".csv", csv);
      } catch (const Error& ex) {
        plots_skipped.push_back({{"file", "acf_pacf_" + stem + ".csv"}, {"reason", ex.what()}});
      }
    }
  }

  {
    json skipped = json::array();
    auto add_skips = [&](const SplitSummary& s, const std::string& arm) {
      for (const auto& k : s.skips) {
        skipped.push_back({{"arm", arm}, {"R", s.R}, {"origin_index", k.origin_index}, {"reason", k.reason}});
      }
    };
    for (const auto& row : grid.cells) {
      for (const auto& s : row) {
        add_skips(s, s.covariate_name);
      }
    }
    for (const auto& s : r.rw_arm) {
      add_skips(s, "random_walk");
    }
    json dropped_covariates = json::array();
    for (const auto& e : record.preprocess.entries) {
      if (e.action == "removed") {
        dropped_covariates.push_back({{"covariate", e.subject}, {"reason", e.reason}});
      }
    }
    const auto attempted = r.windows_attempted();
    const auto skipped_n = r.windows_skipped();
    json manifest = {
        {"config", json::parse(config_to_json(record.config))},
        {"seed", r.seed},
        {"T", r.T},
        {"splits", grid.windows.size()},
        {"versions",
         {{"horserace", HORSERACE_VERSION},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"fmt", std::to_string(FMT_VERSION)},
          {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                        NLOHMANN_JSON_VERSION_PATCH)}}},
        {"dropped_dates", record.dropped_dates},
        {"dropped_covariates", dropped_covariates},
        {"preprocess", preprocess_to_json(record.preprocess)},
        {"windows_attempted", attempted},
        {"windows_skipped", skipped_n},
        {"skip_rate", attempted > 0 ? static_cast<double>(skipped_n) / static_cast<double>(attempted) : 0.0},
        {"skipped_windows", skipped},
        {"plot_files_not_written", plots_skipped},
    };
    std::vector<std::string> files = written;
    files.push_back("run_manifest.json");
    manifest["files"] = files;
    w.write("run_manifest.json", manifest.dump(1) + "\n");
  }
  return written;
}

}  // namespace horserace::app

#include "horserace/app/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "horserace/errors.hpp"

namespace horserace::app {

namespace {

using nlohmann::json;

int parse_int(std::string_view text) {
  while (!text.empty() && text.front() == ' ') {
    text.remove_prefix(1);
  }
  while (!text.empty() && text.back() == ' ') {
    text.remove_suffix(1);
  }
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("not an integer in window spec: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == sep) {
      out.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

template <class T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) {
    field = j.at(key).get<T>();
  }
}

}  // namespace

std::vector<int> default_window_grid() { return parse_window_spec("310:620:10"); }

std::vector<int> parse_window_spec(std::string_view spec) {
  std::vector<int> grid;
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) {
      throw ConfigError("window spec must be start:stop:step");
    }
    const int start = parse_int(parts[0]);
    const int stop = parse_int(parts[1]);
    const int step = parse_int(parts[2]);
    if (step <= 0 || stop < start) {
      throw ConfigError("window spec needs start <= stop and a positive step");
    }
    for (int r = start; r <= stop; r += step) {
      grid.push_back(r);
    }
  } else {
    for (auto part : split(spec, ',')) {
      grid.push_back(parse_int(part));
    }
  }
  return grid;
}

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  RunConfig c;
  try {
    read(j, "target_path", c.target_path);
    read(j, "covariates_path", c.covariates_path);
    if (j.contains("window_grid")) {
      const auto& w = j.at("window_grid");
      c.window_grid = w.is_string() ? parse_window_spec(w.get<std::string>()) : w.get<std::vector<int>>();
    }
    read(j, "horizon", c.horizon);
    read(j, "max_p", c.max_p);
    read(j, "max_q", c.max_q);
    read(j, "max_order", c.max_order);
    read(j, "seasonal_period", c.seasonal_period);
    read(j, "approximate_search", c.approximate_search);
    read(j, "alpha_gate", c.alpha_gate);
    read(j, "alpha_report", c.alpha_report);
    read(j, "seed", c.seed);
    read(j, "covariate_lag", c.covariate_lag);
    read(j, "jobs", c.jobs);
    read(j, "log_gate", c.log_gate);
    if (j.contains("bp_input")) {
      const auto mode = j.at("bp_input").get<std::string>();
      if (mode == "levels") {
        c.bp_input = BreuschPaganInput::levels;
      } else if (mode == "differences") {
        c.bp_input = BreuschPaganInput::differences;
      } else {
        throw ConfigError("bp_input must be 'levels' or 'differences'");
      }
    }
    read(j, "nzv_freq_ratio", c.nzv_freq_ratio);
    read(j, "nzv_unique_pct", c.nzv_unique_pct);
    read(j, "skip_budget", c.skip_budget);
    read(j, "plot_covariates", c.plot_covariates);
    read(j, "plot_windows", c.plot_windows);
    read(j, "acf_lags", c.acf_lags);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

// `jobs` is left out: it never changes results, and outputs must not depend on it.
std::string config_to_json(const RunConfig& c) {
  json j;
  j["target_path"] = c.target_path;
  j["covariates_path"] = c.covariates_path;
  j["window_grid"] = c.window_grid;
  j["horizon"] = c.horizon;
  j["max_p"] = c.max_p;
  j["max_q"] = c.max_q;
  j["max_order"] = c.max_order;
  j["seasonal_period"] = c.seasonal_period;
  j["approximate_search"] = c.approximate_search;
  j["alpha_gate"] = c.alpha_gate;
  j["alpha_report"] = c.alpha_report;
  j["seed"] = c.seed;
  j["covariate_lag"] = c.covariate_lag;
  j["log_gate"] = c.log_gate;
  j["bp_input"] = c.bp_input == BreuschPaganInput::levels ? "levels" : "differences";
  j["nzv_freq_ratio"] = c.nzv_freq_ratio;
  j["nzv_unique_pct"] = c.nzv_unique_pct;
  j["skip_budget"] = c.skip_budget;
  j["plot_covariates"] = c.plot_covariates;
  j["plot_windows"] = c.plot_windows;
  j["acf_lags"] = c.acf_lags;
  return j.dump(2);
}

void validate_config(const RunConfig& c, std::size_t T) {
  if (c.horizon != 1) {
    throw ConfigError("only horizon 1 is supported");
  }
  if (c.window_grid.empty()) {
    throw ConfigError("window grid is empty");
  }
  for (std::size_t i = 0; i < c.window_grid.size(); ++i) {
    if (c.window_grid[i] < 30) {
      throw ConfigError("window length " + std::to_string(c.window_grid[i]) + " is below 30");
    }
    if (i > 0 && c.window_grid[i] <= c.window_grid[i - 1]) {
      throw ConfigError("window grid must be strictly ascending");
    }
  }
  if (T > 0 && c.window_grid.back() >= static_cast<int>(T)) {
    throw ConfigError("window length " + std::to_string(c.window_grid.back()) +
                      " is not below T=" + std::to_string(T));
  }
  if (c.max_p < 0 || c.max_q < 0 || c.max_order < 0 || c.seasonal_period < 0 || c.seasonal_period == 1) {
    throw ConfigError("orders must be non-negative and the seasonal period 0 or at least 2");
  }
  for (double a : {c.alpha_gate, c.alpha_report}) {
    if (!(a > 0.0 && a < 1.0)) {
      throw ConfigError("significance levels must lie in (0, 1)");
    }
  }
  if (c.covariate_lag < 0) {
    throw ConfigError("covariate_lag must be non-negative");
  }
  if (c.jobs < 1) {
    throw ConfigError("jobs must be at least 1");
  }
  if (!(c.nzv_freq_ratio > 0.0) || !(c.nzv_unique_pct > 0.0)) {
    throw ConfigError("near-zero-variance cutoffs must be positive");
  }
  if (!(c.skip_budget >= 0.0 && c.skip_budget <= 1.0)) {
    throw ConfigError("skip_budget must lie in [0, 1]");
  }
  if (c.acf_lags < 1) {
    throw ConfigError("acf_lags must be at least 1");
  }
}

EvaluationConfig to_evaluation_config(const RunConfig& c) {
  EvaluationConfig e;
  e.window_grid = c.window_grid;
  e.covariate_lag = c.covariate_lag;
  e.arima.max_p = c.max_p;
  e.arima.max_q = c.max_q;
  e.arima.max_order = c.max_order;
  e.arima.seasonal_period = c.seasonal_period;
  e.arima.approximate = c.approximate_search;
  e.battery.alpha_gate = c.alpha_gate;
  e.seed = c.seed;
  e.jobs = c.jobs;
  return e;
}

}  // namespace horserace::app

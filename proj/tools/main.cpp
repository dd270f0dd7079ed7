// horserace: regARIMA-versus-random-walk forecast horse race.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>

#include "horserace/app/config.hpp"
#include "horserace/app/ingest.hpp"
#include "horserace/app/preprocess.hpp"
#include "horserace/app/report_io.hpp"
#include "horserace/app/simulate.hpp"
#include "horserace/errors.hpp"

namespace fs = std::filesystem;
using namespace horserace;

namespace {

constexpr int kOk = 0;
constexpr int kInputFailure = 1;
constexpr int kSkipBudgetExceeded = 2;

struct Overrides {
  std::string config_path;
  std::string target;
  std::string covariates;
  std::optional<std::uint64_t> seed;
  std::string windows;
  std::optional<int> jobs;
};

app::RunConfig resolve(const Overrides& o) {
  app::RunConfig c = o.config_path.empty() ? app::RunConfig{} : app::load_config(o.config_path);
  if (!o.target.empty()) {
    c.target_path = o.target;
  }
  if (!o.covariates.empty()) {
    c.covariates_path = o.covariates;
  }
  if (o.seed) {
    c.seed = *o.seed;
  }
  if (!o.windows.empty()) {
    c.window_grid = app::parse_window_spec(o.windows);
  }
  if (o.jobs) {
    c.jobs = *o.jobs;
  }
  if (c.window_grid.empty()) {
    c.window_grid = app::default_window_grid();
  }
  if (c.target_path.empty() || c.covariates_path.empty()) {
    throw ConfigError("target and covariate files are required (config or --target/--covariates)");
  }
  return c;
}

struct Prepared {
  app::RunConfig config;
  app::IngestResult ingest;
  app::PreprocessResult pre;
};

Prepared prepare(const Overrides& o) {
  auto config = resolve(o);
  auto ingest = app::ingest_panel(config.target_path, config.covariates_path);
  auto pre = app::preprocess(ingest.panel, config);
  app::validate_config(config, pre.panel.T());
  return {std::move(config), std::move(ingest), std::move(pre)};
}

void print_summary(const Prepared& p) {
  fmt::print("panel: T={} covariates={} ({} to {})\n", p.pre.panel.T(), p.pre.panel.k(),
             p.pre.panel.target().start().to_string(), p.pre.panel.target().end().to_string());
  fmt::print("dates dropped by alignment: {}\n", p.ingest.dropped_dates.size());
  for (const auto& e : p.pre.log.entries) {
    fmt::print("  {}: {} ({})\n", e.subject, e.action, e.reason);
  }
  fmt::print("window grid: {} splits, R={}..{}\n", p.config.window_grid.size(), p.config.window_grid.front(),
             p.config.window_grid.back());
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--target", o.target, "target CSV (date,value)");
  cmd->add_option("--covariates", o.covariates, "covariate CSV (date,<name>...)");
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--windows", o.windows, "window grid, start:stop:step");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Rolling-origin horse race of regARIMA models against the random walk"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", HORSERACE_CLI_VERSION);

  Overrides validate_opts;
  auto* validate = cli.add_subcommand("validate", "ingest and preprocess without writing anything");
  add_common(validate, validate_opts);

  Overrides run_opts;
  std::string run_out = "horserace_out";
  auto* run = cli.add_subcommand("run", "run the full horse race and write the report");
  add_common(run, run_opts);
  run->add_option("--out", run_out, "output directory");

  app::SimSpec sim;
  std::string sim_out = ".";
  auto* simulate = cli.add_subcommand("simulate", "write a synthetic panel as target.csv and covariates.csv");
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--seed", sim.seed, "simulation seed");
  simulate->add_option("--T", sim.T, "observations");
  simulate->add_option("--beta", sim.beta, "covariate effect");
  simulate->add_option("--sd", sim.innovation_sd, "target innovation sd");
  simulate->add_option("--phi", sim.covariate_phi, "covariate AR(1) coefficient");
  simulate->add_option("--covariate-sd", sim.covariate_sd, "covariate innovation sd");
  simulate->add_option("--signal-share", sim.signal_share, "share of increment variance explained by the covariate");
  simulate->add_option("--covariate-mean", sim.covariate_mean, "covariate mean level");
  simulate->add_option("--noise", sim.noise_covariates, "independent noise covariates");
  simulate->add_option("--hetero", sim.heteroscedasticity, "relative growth of the innovation sd");
  simulate->add_option("--level", sim.start_level, "starting level of the target");

  std::string report_from;
  std::string report_out = "horserace_out";
  auto* report = cli.add_subcommand("report", "re-emit report files from a saved report.json");
  report->add_option("--from", report_from, "saved report.json")->required();
  report->add_option("--out", report_out, "output directory");

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*validate) {
      print_summary(prepare(validate_opts));
      fmt::print("ok\n");
      return kOk;
    }
    if (*run) {
      auto p = prepare(run_opts);
      print_summary(p);
      const auto eval = app::to_evaluation_config(p.config);
      app::RunRecord record{p.config, {}, p.pre.log, run_horse_race(p.pre.panel, eval)};
      for (Date d : p.ingest.dropped_dates) {
        record.dropped_dates.push_back(d.to_string());
      }
      const auto files = app::emit_report(record, run_out);
      const auto attempted = record.report.windows_attempted();
      const auto skipped = record.report.windows_skipped();
      const double rate = attempted > 0 ? static_cast<double>(skipped) / static_cast<double>(attempted) : 0.0;
      fmt::print("wrote {} files to {}\n", files.size(), run_out);
      fmt::print("windows: {} attempted, {} skipped ({:.2f}%)\n", attempted, skipped, 100.0 * rate);
      if (rate > p.config.skip_budget) {
        fmt::print(stderr, "skip rate {:.2f}% exceeds the budget of {:.2f}%\n", 100.0 * rate,
                   100.0 * p.config.skip_budget);
        return kSkipBudgetExceeded;
      }
      return kOk;
    }
    if (*simulate) {
      fs::create_directories(sim_out);
      const auto panel = app::simulate_panel(sim);
      app::write_panel(panel, fs::path(sim_out) / "target.csv", fs::path(sim_out) / "covariates.csv");
      fmt::print("wrote {}/target.csv and {}/covariates.csv (T={}, covariates={})\n", sim_out, sim_out, panel.T(),
                 panel.k());
      return kOk;
    }
    if (*report) {
      const auto record = app::load_record(report_from);
      const auto files = app::emit_report(record, report_out);
      fmt::print("wrote {} files to {}\n", files.size(), report_out);
      return kOk;
    }
  } catch (const IngestError& e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return kInputFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputFailure;
  }
  return kOk;
}

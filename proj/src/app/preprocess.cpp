#include "horserace/app/preprocess.hpp"

#include <fmt/format.h>

namespace horserace::app {

PreprocessResult preprocess(const Panel& panel, const RunConfig& config) {
  auto filtered = near_zero_variance_filter(panel, config.nzv_freq_ratio, config.nzv_unique_pct);
  PreprocessLog log;
  for (const auto& name : filtered.removed) {
    log.removed_covariates.push_back(name);
    log.entries.push_back({name, "removed",
                           fmt::format("near-zero variance (frequency ratio > {:g} and distinct values < {:g}%)",
                                       config.nzv_freq_ratio, config.nzv_unique_pct)});
  }
  Panel out = std::move(filtered.panel);
  if (config.log_gate) {
    const auto bp = breusch_pagan(out.target(), config.bp_input);
    log.breusch_pagan = bp;
    const std::string detail = fmt::format("Breusch-Pagan LM={:.4f}, p={:.4g}, alpha={:g}", bp.statistic,
                                           bp.p_value, config.alpha_gate);
    if (bp.p_value < config.alpha_gate) {
      out = out.with_target(log_transform(out.target()));
      log.log_applied = true;
      log.entries.push_back({out.target().name(), "log-transformed", "heteroscedastic: " + detail});
    } else {
      log.entries.push_back({out.target().name(), "kept", "no heteroscedasticity: " + detail});
    }
  }
  return {std::move(out), std::move(log)};
}

}  // namespace horserace::app

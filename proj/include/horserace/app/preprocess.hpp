#pragma once

#include <optional>
#include <string>
#include <vector>

#include "horserace/app/config.hpp"
#include "horserace/diagnostics.hpp"
#include "horserace/series.hpp"

namespace horserace::app {

struct LogEntry {
  /// Series the action applies to.
  std::string subject;
  std::string action;
  std::string reason;
};

struct PreprocessLog {
  std::vector<LogEntry> entries;
  std::vector<std::string> removed_covariates;
  /// Absent when the log gate is disabled.
  std::optional<TestResult> breusch_pagan;
  bool log_applied = false;
};

struct PreprocessResult {
  Panel panel;
  PreprocessLog log;
};

/// Near-zero-variance filter on the covariates, then a Breusch-Pagan test on
/// the target; the target is log-transformed iff that test rejects at
/// `alpha_gate`.
PreprocessResult preprocess(const Panel& panel, const RunConfig& config);

}  // namespace horserace::app

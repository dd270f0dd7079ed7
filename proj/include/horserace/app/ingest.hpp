#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "horserace/series.hpp"

namespace horserace::app {

/// A parsed CSV file: one date column and one or more named value columns.
struct DatedTable {
  std::vector<Date> dates;
  std::vector<std::string> names;
  /// columns[j][i] is the value of column j on dates[i].
  std::vector<std::vector<double>> columns;
};

/// Parses `date,<name>...` CSV text. Dates must be ISO-8601, strictly
/// increasing and gap-free; every cell must be a finite number. Errors carry
/// the 1-based line number.
DatedTable parse_dated_csv(const std::string& text, const std::string& source);
DatedTable read_dated_csv(const std::filesystem::path& path);

struct IngestResult {
  Panel panel;
  /// Dates present in only one of the two files.
  std::vector<Date> dropped_dates;
};

/// Target file `date,value`; covariate file `date,<name1>,<name2>,...`.
/// The panel covers the dates both files share.
IngestResult ingest_panel(const std::filesystem::path& target_path,
                          const std::filesystem::path& covariates_path);
IngestResult align_tables(const DatedTable& target, const DatedTable& covariates);

/// Writes a panel as two CSV files in the ingestion format.
void write_panel(const Panel& panel, const std::filesystem::path& target_path,
                 const std::filesystem::path& covariates_path);

}  // namespace horserace::app

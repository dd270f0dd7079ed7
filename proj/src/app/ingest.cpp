#include "horserace/app/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "horserace/errors.hpp"

namespace horserace::app {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::string where(const std::string& source, std::size_t row) {
  return fmt::format("{}, row {}", source, row);
}

}  // namespace

DatedTable parse_dated_csv(const std::string& text, const std::string& source) {
  DatedTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      continue;
    }
    const auto cells = fields(line);
    if (header) {
      if (cells.size() < 2) {
        throw IngestError(where(source, row) + ": header needs a date column and at least one value column",
                          row);
      }
      std::set<std::string> seen;
      for (std::size_t j = 1; j < cells.size(); ++j) {
        std::string name(cells[j]);
        if (name.empty() || !seen.insert(name).second) {
          throw IngestError(where(source, row) + ": empty or duplicate column name '" + name + "'", row);
        }
        table.names.push_back(std::move(name));
      }
      table.columns.resize(table.names.size());
      header = false;
      continue;
    }
    if (cells.size() != table.names.size() + 1) {
      throw IngestError(where(source, row) + fmt::format(": expected {} fields, found {}",
                                                         table.names.size() + 1, cells.size()),
                        row);
    }
    Date date;
    try {
      date = Date::parse(std::string(cells[0]));
    } catch (const Error&) {
      throw IngestError(where(source, row) + ": bad date '" + std::string(cells[0]) + "'", row);
    }
    if (!table.dates.empty()) {
      const Date last = table.dates.back();
      if (date == last) {
        throw IngestError(where(source, row) + ": duplicate date " + date.to_string(), row);
      }
      if (date < last) {
        throw IngestError(where(source, row) + ": date " + date.to_string() + " is out of order", row);
      }
      if (date - last > 1) {
        throw IngestError(where(source, row) + ": gap, missing date " + (last + 1).to_string(), row);
      }
    }
    table.dates.push_back(date);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const auto cell = cells[j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw IngestError(where(source, row) + ": cannot parse '" + std::string(cell) + "' in column '" +
                              table.names[j - 1] + "'",
                          row);
      }
      table.columns[j - 1].push_back(v);
    }
  }
  if (header) {
    throw IngestError(source + ": no header row", 0);
  }
  return table;
}

DatedTable read_dated_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dated_csv(buffer.str(), path.string());
}

IngestResult align_tables(const DatedTable& target, const DatedTable& covariates) {
  if (target.names.size() != 1) {
    throw IngestError("target file must have exactly one value column", 1);
  }
  if (target.dates.empty() || covariates.dates.empty()) {
    throw IngestError("target and covariate files need data rows", 0);
  }
  // Both files are gap-free, so the shared dates form one contiguous run.
  const Date first = std::max(target.dates.front(), covariates.dates.front());
  const Date last = std::min(target.dates.back(), covariates.dates.back());
  if (last < first || last - first + 1 < 2) {
    throw IngestError("target and covariate files share fewer than two dates", 0);
  }
  const auto T = static_cast<std::size_t>(last - first + 1);
  std::vector<Date> dropped;
  for (const auto* table : {&target, &covariates}) {
    for (Date d : table->dates) {
      if (d < first || d > last) {
        dropped.push_back(d);
      }
    }
  }
  std::sort(dropped.begin(), dropped.end());
  dropped.erase(std::unique(dropped.begin(), dropped.end()), dropped.end());

  auto cut = [&](const DatedTable& table, std::size_t j, const std::string& name) {
    const auto offset = static_cast<std::size_t>(first - table.dates.front());
    std::vector<double> v(table.columns[j].begin() + static_cast<std::ptrdiff_t>(offset),
                          table.columns[j].begin() + static_cast<std::ptrdiff_t>(offset + T));
    return TimeSeries(name, first, std::move(v));
  };
  std::vector<TimeSeries> covs;
  for (std::size_t j = 0; j < covariates.names.size(); ++j) {
    covs.push_back(cut(covariates, j, covariates.names[j]));
  }
  return {Panel(cut(target, 0, target.names[0]), std::move(covs)), std::move(dropped)};
}

IngestResult ingest_panel(const std::filesystem::path& target_path,
                          const std::filesystem::path& covariates_path) {
  return align_tables(read_dated_csv(target_path), read_dated_csv(covariates_path));
}

void write_panel(const Panel& panel, const std::filesystem::path& target_path,
                 const std::filesystem::path& covariates_path) {
  std::ofstream t(target_path, std::ios::binary);
  std::ofstream c(covariates_path, std::ios::binary);
  if (!t || !c) {
    throw IoError("cannot write panel files");
  }
  t << "date,value\n";
  c << "date";
  for (const auto& s : panel.covariates()) {
    c << ',' << s.name();
  }
  c << '\n';
  for (std::size_t i = 0; i < panel.T(); ++i) {
    const auto date = panel.target().date(i).to_string();
    t << fmt::format("{},{}\n", date, panel.target()[i]);
    c << date;
    for (const auto& s : panel.covariates()) {
      c << fmt::format(",{}", s[i]);
    }
    c << '\n';
  }
}

}  // namespace horserace::app

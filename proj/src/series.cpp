#include "horserace/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "horserace/errors.hpp"

namespace horserace {

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw InputError("invalid calendar date");
  }
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(const std::string& text) {
  auto fail = [&] { return InputError("not an ISO-8601 date: '" + text + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw fail();
  }
  auto field = [&](std::size_t pos, std::size_t len) {
    int value = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
      throw fail();
    }
    return value;
  };
  const int y = field(0, 4);
  const int m = field(5, 2);
  const int d = field(8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw fail();
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw fail();
  }
  return Date(std::chrono::sys_days{ymd});
}

std::string Date::to_string() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

TimeSeries::TimeSeries(std::string name, Date start, std::vector<double> values)
    : name_(std::move(name)), start_(start), values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::isnan(values_[i])) {
      throw InputError("series '" + name_ + "' has a missing value at " + date(i).to_string());
    }
  }
}

TimeSeries TimeSeries::from_index(std::string name, std::span<const Date> index,
                                  std::vector<double> values) {
  if (index.size() != values.size()) {
    throw InputError("series '" + name + "': index and values differ in length");
  }
  for (std::size_t i = 1; i < index.size(); ++i) {
    const long step = index[i] - index[i - 1];
    if (step != 1) {
      throw InputError("series '" + name + "': index is not daily at " + index[i].to_string() +
                       (step > 1 ? " (gap after " + index[i - 1].to_string() + ")" : ""));
    }
  }
  const Date start = index.empty() ? Date{} : index.front();
  return TimeSeries(std::move(name), start, std::move(values));
}

std::vector<Date> TimeSeries::index() const {
  std::vector<Date> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out.push_back(date(i));
  }
  return out;
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > values_.size()) {
    throw LengthError("slice beyond the end of series '" + name_ + "'");
  }
  return TimeSeries(name_, date(first),
                    std::vector<double>(values_.begin() + static_cast<long>(first),
                                        values_.begin() + static_cast<long>(first + count)));
}

TimeSeries TimeSeries::renamed(std::string name) const {
  TimeSeries out = *this;
  out.name_ = std::move(name);
  return out;
}

Panel::Panel(TimeSeries target, std::vector<TimeSeries> covariates)
    : target_(std::move(target)), covariates_(std::move(covariates)) {
  if (target_.size() < 2) {
    throw InputError("panel needs at least 2 observations");
  }
  std::set<std::string> names;
  for (const auto& c : covariates_) {
    if (c.start() != target_.start() || c.size() != target_.size()) {
      throw InputError("covariate '" + c.name() + "' does not share the target index");
    }
    if (!names.insert(c.name()).second) {
      throw InputError("duplicate covariate name '" + c.name() + "'");
    }
  }
}

const TimeSeries* Panel::find(const std::string& name) const {
  for (const auto& c : covariates_) {
    if (c.name() == name) {
      return &c;
    }
  }
  return nullptr;
}

Panel Panel::with_target(TimeSeries target) const { return Panel(std::move(target), covariates_); }

Panel Panel::with_covariate(TimeSeries covariate) const {
  auto covs = covariates_;
  covs.push_back(std::move(covariate));
  return Panel(target_, std::move(covs));
}

Panel Panel::without_covariates(std::span<const std::string> names) const {
  std::vector<TimeSeries> kept;
  for (const auto& c : covariates_) {
    if (std::find(names.begin(), names.end(), c.name()) == names.end()) {
      kept.push_back(c);
    }
  }
  return Panel(target_, std::move(kept));
}

TimeSeries log_transform(const TimeSeries& series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!(series[i] > 0.0)) {
      throw DomainError("log transform of non-positive value in '" + series.name() + "' at " +
                        series.date(i).to_string());
    }
    out[i] = std::log(series[i]);
  }
  return TimeSeries(series.name(), series.start(), std::move(out));
}

std::vector<double> difference(std::span<const double> values, int d) {
  if (d < 0) {
    throw InputError("differencing order must be non-negative");
  }
  if (values.size() <= static_cast<std::size_t>(d)) {
    throw LengthError("series too short to difference " + std::to_string(d) + " times");
  }
  std::vector<double> out(values.begin(), values.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      out[i] = out[i + 1] - out[i];
    }
    out.pop_back();
  }
  return out;
}

TimeSeries difference(const TimeSeries& series, int d) {
  auto out = difference(series.values(), d);
  return TimeSeries(series.name(), series.start() + d, std::move(out));
}

TimeSeries seasonal_difference(const TimeSeries& series, int period, int times) {
  if (period < 1 || times < 0) {
    throw InputError("invalid seasonal difference");
  }
  const std::size_t lag = static_cast<std::size_t>(period);
  if (series.size() <= lag * static_cast<std::size_t>(times)) {
    throw LengthError("series too short for seasonal differencing");
  }
  std::vector<double> v = series.values();
  for (int k = 0; k < times; ++k) {
    std::vector<double> next(v.size() - lag);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = v[i + lag] - v[i];
    }
    v = std::move(next);
  }
  return TimeSeries(series.name(), series.start() + static_cast<long>(lag) * times, std::move(v));
}

NearZeroVarianceResult near_zero_variance_filter(const Panel& panel, double freq_ratio_cutoff,
                                                 double unique_pct_cutoff) {
  if (!(freq_ratio_cutoff > 0.0) || !(unique_pct_cutoff > 0.0)) {
    throw InputError("near-zero-variance cutoffs must be positive");
  }
  std::vector<std::string> removed;
  for (const auto& c : panel.covariates()) {
    std::map<double, std::size_t> counts;
    for (double v : c.values()) {
      ++counts[v];
    }
    if (counts.size() <= 1) {
      removed.push_back(c.name());
      continue;
    }
    std::size_t first = 0;
    std::size_t second = 0;
    for (const auto& [value, n] : counts) {
      if (n > first) {
        second = first;
        first = n;
      } else if (n > second) {
        second = n;
      }
    }
    const double ratio = static_cast<double>(first) / static_cast<double>(second);
    const double unique_pct = 100.0 * static_cast<double>(counts.size()) / static_cast<double>(c.size());
    if (ratio > freq_ratio_cutoff && unique_pct < unique_pct_cutoff) {
      removed.push_back(c.name());
    }
  }
  return {panel.without_covariates(removed), removed};
}

double mean(std::span<const double> values) {
  if (values.empty()) {
    throw LengthError("mean of an empty sequence");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  const double m = mean(values);
  double s = 0.0;
  for (double v : values) {
    s += (v - m) * (v - m);
  }
  return s / static_cast<double>(values.size());
}

MomentSummary moments(std::span<const double> values) {
  if (values.size() < 4) {
    throw LengthError("moments need at least 4 values");
  }
  const double n = static_cast<double>(values.size());
  MomentSummary out;
  out.mean = mean(values);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double c = v - out.mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.variance = m2;
  if (m2 > 0.0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
  }
  return out;
}

namespace {

std::vector<double> autocorrelations(std::span<const double> values, std::size_t max_lag) {
  if (max_lag < 1 || values.size() <= max_lag) {
    throw LengthError("correlogram needs 1 <= max_lag < length");
  }
  const double m = mean(values);
  const std::size_t n = values.size();
  double c0 = 0.0;
  for (double v : values) {
    c0 += (v - m) * (v - m);
  }
  if (!(c0 > 0.0)) {
    throw VarianceError("correlogram of a constant series");
  }
  std::vector<double> r(max_lag);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t t = lag; t < n; ++t) {
      c += (values[t] - m) * (values[t - lag] - m);
    }
    r[lag - 1] = c / c0;
  }
  return r;
}

}  // namespace

Correlogram acf(std::span<const double> values, std::size_t max_lag) {
  return {autocorrelations(values, max_lag), 1.96 / std::sqrt(static_cast<double>(values.size()))};
}

Correlogram pacf(std::span<const double> values, std::size_t max_lag) {
  const auto r = autocorrelations(values, max_lag);
  std::vector<double> out(max_lag);
  std::vector<double> phi(max_lag + 1, 0.0);
  std::vector<double> prev(max_lag + 1, 0.0);
  double v = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = r[k - 1];
    for (std::size_t j = 1; j < k; ++j) {
      num -= prev[j] * r[k - j - 1];
    }
    const double a = v > 0.0 ? num / v : 0.0;
    phi[k] = a;
    for (std::size_t j = 1; j < k; ++j) {
      phi[j] = prev[j] - a * prev[k - j];
    }
    v *= (1.0 - a * a);
    out[k - 1] = a;
    prev = phi;
  }
  return {std::move(out), 1.96 / std::sqrt(static_cast<double>(values.size()))};
}

std::vector<int> rank(std::span<const double> scores, RankDirection direction) {
  if (scores.empty()) {
    throw InputError("rank of an empty score list");
  }
  for (double s : scores) {
    if (std::isnan(s)) {
      throw InputError("NaN score cannot be ranked");
    }
  }
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int better = 0;
    for (double other : scores) {
      const bool is_better =
          direction == RankDirection::ascending ? other < scores[i] : other > scores[i];
      better += is_better ? 1 : 0;
    }
    out[i] = better + 1;
  }
  return out;
}

}  // namespace horserace

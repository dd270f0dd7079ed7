#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace horserace {

/// Calendar date with day resolution.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Parses an ISO-8601 `YYYY-MM-DD` string; throws InputError otherwise.
  static Date parse(const std::string& text);

  std::string to_string() const;
  std::chrono::sys_days days() const { return days_; }
  long serial() const { return days_.time_since_epoch().count(); }

  Date operator+(long n) const { return Date(days_ + std::chrono::days{n}); }
  long operator-(Date other) const { return (days_ - other.days_).count(); }
  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

/// Equally spaced daily observations. The index is implied by the start date
/// and a one-day step, so the spacing invariant holds by construction.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::string name, Date start, std::vector<double> values);

  /// Builds from an explicit index; throws InputError unless the dates are
  /// strictly increasing with a one-day step and match `values` in length.
  static TimeSeries from_index(std::string name, std::span<const Date> index,
                               std::vector<double> values);

  const std::string& name() const { return name_; }
  Date start() const { return start_; }
  Date date(std::size_t i) const { return start_ + static_cast<long>(i); }
  Date end() const { return date(values_.size() - 1); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<Date> index() const;

  /// Contiguous sub-series [first, first + count).
  TimeSeries slice(std::size_t first, std::size_t count) const;
  TimeSeries renamed(std::string name) const;

  bool operator==(const TimeSeries&) const = default;

 private:
  std::string name_;
  Date start_{};
  std::vector<double> values_;
};

/// One target series plus k covariates on a shared index.
class Panel {
 public:
  Panel(TimeSeries target, std::vector<TimeSeries> covariates);

  const TimeSeries& target() const { return target_; }
  const std::vector<TimeSeries>& covariates() const { return covariates_; }
  std::size_t T() const { return target_.size(); }
  std::size_t k() const { return covariates_.size(); }

  /// nullptr when absent.
  const TimeSeries* find(const std::string& name) const;
  Panel with_target(TimeSeries target) const;
  Panel with_covariate(TimeSeries covariate) const;
  Panel without_covariates(std::span<const std::string> names) const;

 private:
  TimeSeries target_;
  std::vector<TimeSeries> covariates_;
};

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;
  /// Absent when the variance is zero.
  std::optional<double> skewness;
  std::optional<double> kurtosis;
};

/// Correlogram values for lags 1..max_lag plus the +/-1.96/sqrt(n) band.
struct Correlogram {
  std::vector<double> values;
  double band = 0.0;
};

enum class RankDirection { ascending, descending };

TimeSeries log_transform(const TimeSeries& series);
TimeSeries difference(const TimeSeries& series, int d);
/// Seasonal difference (1 - B^period)^times.
TimeSeries seasonal_difference(const TimeSeries& series, int period, int times);

std::vector<double> difference(std::span<const double> values, int d);

struct NearZeroVarianceResult {
  Panel panel;
  std::vector<std::string> removed;
};

/// Drops covariates that are constant, or whose most-common/second-most-common
/// frequency ratio exceeds `freq_ratio_cutoff` while the percentage of distinct
/// values is below `unique_pct_cutoff` (given in percent).
NearZeroVarianceResult near_zero_variance_filter(const Panel& panel,
                                                 double freq_ratio_cutoff = 19.0,
                                                 double unique_pct_cutoff = 10.0);

MomentSummary moments(std::span<const double> values);

double mean(std::span<const double> values);
/// Population variance (divisor n).
double variance(std::span<const double> values);

Correlogram acf(std::span<const double> values, std::size_t max_lag);
/// Partial autocorrelations by Durbin-Levinson.
Correlogram pacf(std::span<const double> values, std::size_t max_lag);

/// Rank 1 is the best score under `direction`; ties share the minimum rank.
std::vector<int> rank(std::span<const double> scores, RankDirection direction);

}  // namespace horserace

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socialwell/time.hpp"

namespace socialwell {

/// Irregularly observed real-valued series. Times are in days, strictly
/// increasing; `origin` anchors time 0 on the calendar when known.
class AsyncSeries {
 public:
  AsyncSeries(Eigen::VectorXd times, Eigen::VectorXd values, std::string name = {},
              std::optional<time::Instant> origin = std::nullopt);

  const Eigen::VectorXd& times() const { return times_; }
  const Eigen::VectorXd& values() const { return values_; }
  const std::string& name() const { return name_; }
  const std::optional<time::Instant>& origin() const { return origin_; }
  Eigen::Index size() const { return times_.size(); }

  AsyncSeries with_values(Eigen::VectorXd values) const;
  AsyncSeries with_times(Eigen::VectorXd times) const;

 private:
  Eigen::VectorXd times_;
  Eigen::VectorXd values_;
  std::string name_;
  std::optional<time::Instant> origin_;
};

/// One `ts,value` CSV file as read from disk, before the time origin is fixed.
struct TimedValues {
  std::vector<time::Instant> instants;
  std::vector<double> values;
};

/// Reads a `ts,value` CSV. Rejects non-finite values and duplicate
/// timestamps; rows are sorted by time.
TimedValues read_timed_csv(std::istream& in, const std::string& source,
                           time::PeriodStamp stamp = time::PeriodStamp::End);

/// Converts to fractional days from `origin`.
AsyncSeries to_series(const TimedValues& raw, time::Instant origin, std::string name);

/// Writes `ts,value` with ISO dates (date-times when not at midnight).
void write_timed_csv(std::ostream& out, const AsyncSeries& series);

}  // namespace socialwell

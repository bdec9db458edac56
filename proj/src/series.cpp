#include "socialwell/series.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "socialwell/io.hpp"

namespace socialwell {

AsyncSeries::AsyncSeries(Eigen::VectorXd times, Eigen::VectorXd values, std::string name,
                         std::optional<time::Instant> origin)
    : times_(std::move(times)), values_(std::move(values)), name_(std::move(name)), origin_(origin) {
  if (times_.size() != values_.size()) throw std::invalid_argument("series '" + name_ + "': times and values differ in length");
  if (times_.size() < 2) throw std::invalid_argument("series '" + name_ + "': needs at least two observations");
  if (!times_.allFinite() || !values_.allFinite())
    throw std::invalid_argument("series '" + name_ + "': non-finite time or value");
  for (Eigen::Index i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw std::invalid_argument("series '" + name_ + "': times must be strictly increasing");
}

AsyncSeries AsyncSeries::with_values(Eigen::VectorXd values) const {
  return AsyncSeries(times_, std::move(values), name_, origin_);
}

AsyncSeries AsyncSeries::with_times(Eigen::VectorXd times) const {
  return AsyncSeries(std::move(times), values_, name_, origin_);
}

TimedValues read_timed_csv(std::istream& in, const std::string& source, time::PeriodStamp stamp) {
  const io::CsvTable table = io::read_csv(in, source);
  const auto ts_col = table.column("ts");
  const auto value_col = table.column("value");
  std::vector<std::pair<time::Instant, double>> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = source + ":" + std::to_string(r + 2);
    time::Instant t;
    try {
      t = time::parse_instant(table.rows[r][ts_col], stamp);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    const double v = io::parse_double(table.rows[r][value_col], where);
    if (!std::isfinite(v)) throw std::invalid_argument(where + ": non-finite value");
    rows.emplace_back(t, v);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].first == rows[i - 1].first)
      throw std::invalid_argument(source + ": duplicate timestamp " + time::format_instant(rows[i].first));
  TimedValues out;
  for (const auto& [t, v] : rows) {
    out.instants.push_back(t);
    out.values.push_back(v);
  }
  return out;
}

AsyncSeries to_series(const TimedValues& raw, time::Instant origin, std::string name) {
  const auto n = static_cast<Eigen::Index>(raw.instants.size());
  Eigen::VectorXd times(n), values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    times[i] = time::days_between(origin, raw.instants[static_cast<std::size_t>(i)]);
    values[i] = raw.values[static_cast<std::size_t>(i)];
  }
  return AsyncSeries(std::move(times), std::move(values), std::move(name), origin);
}

void write_timed_csv(std::ostream& out, const AsyncSeries& series) {
  const time::Instant origin = series.origin().value_or(time::Instant{});
  out << "ts,value\n";
  for (Eigen::Index i = 0; i < series.size(); ++i)
    out << time::format_instant(time::add_days(origin, series.times()[i])) << ',' << io::format_number(series.values()[i])
        << '\n';
}

}  // namespace socialwell

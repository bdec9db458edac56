#include "socialwell/stats.hpp"

#include <istream>
#include <map>
#include <set>

#include "socialwell/io.hpp"

namespace socialwell::stats {

void IndicatorMatrix::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(units.size()) || values.cols() != static_cast<Eigen::Index>(names.size()))
    throw std::invalid_argument("stats: indicator matrix shape does not match its labels");
  std::set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second) throw std::invalid_argument("stats: duplicate column '" + n + "'");
  seen.clear();
  for (const auto& u : units)
    if (!seen.insert(u).second) throw std::invalid_argument("stats: duplicate unit '" + u + "'");
  if (!values.allFinite()) throw std::invalid_argument("stats: non-finite indicator value");
}

Eigen::VectorXd IndicatorMatrix::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::invalid_argument("stats: no column named '" + name + "'");
  return values.col(it - names.begin());
}

IndicatorMatrix read_indicators(std::istream& in, const std::string& source) {
  const auto table = io::read_csv(in, source);
  const auto unit_col = table.column("unit");
  IndicatorMatrix out;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (c != unit_col) out.names.push_back(table.header[c]);
  if (out.names.empty()) throw std::invalid_argument(source + ": no indicator columns");
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(out.names.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    out.units.push_back(fields[unit_col]);
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == unit_col) continue;
      if (fields[c].empty())
        throw std::invalid_argument(source + ": row '" + fields[unit_col] + "' has a missing value in column '" +
                                    table.header[c] + "'");
      out.values(static_cast<Eigen::Index>(r), k++) =
          io::parse_double(fields[c], source + ": row '" + fields[unit_col] + "'");
    }
  }
  out.validate();
  return out;
}

IndicatorMatrix align_units(const IndicatorMatrix& x, const IndicatorMatrix& y) {
  std::map<std::string, Eigen::Index> y_rows;
  for (std::size_t i = 0; i < y.units.size(); ++i) y_rows[y.units[i]] = static_cast<Eigen::Index>(i);
  std::string missing;
  IndicatorMatrix out{x.units, y.names, Eigen::MatrixXd(static_cast<Eigen::Index>(x.units.size()), y.values.cols())};
  for (std::size_t i = 0; i < x.units.size(); ++i) {
    auto it = y_rows.find(x.units[i]);
    if (it == y_rows.end()) {
      missing += (missing.empty() ? "" : ", ") + x.units[i];
      continue;
    }
    out.values.row(static_cast<Eigen::Index>(i)) = y.values.row(it->second);
    y_rows.erase(it);
  }
  for (const auto& [unit, row] : y_rows) missing += (missing.empty() ? "" : ", ") + unit;
  if (!missing.empty()) throw std::invalid_argument("stats: unit keys differ between inputs: " + missing);
  return out;
}

std::string significance_stars(double p) {
  if (std::isnan(p)) return "";
  if (p <= 0.001) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  return "";
}

}  // namespace socialwell::stats

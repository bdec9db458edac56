#include "socialwell/wellbeing.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "socialwell/io.hpp"

namespace socialwell::wellbeing {

std::string_view code(Component c) {
  switch (c) {
    case Component::Emo: return "emo";
    case Component::Sat: return "sat";
    case Component::Vit: return "vit";
    case Component::Res: return "res";
    case Component::Fun: return "fun";
    case Component::Tru: return "tru";
    case Component::Rel: return "rel";
    case Component::Wor: return "wor";
  }
  return "?";
}

std::optional<Component> parse_component(std::string_view text) {
  for (auto c : kComponents)
    if (code(c) == text) return c;
  return std::nullopt;
}

void PolarityDistribution::validate() const {
  if (!(neg >= 0 && neu >= 0 && pos >= 0)) throw std::invalid_argument("wellbeing: negative polarity share");
  if (std::abs(neg + neu + pos - 1.0) > 1e-9) throw std::invalid_argument("wellbeing: polarity shares do not sum to 1");
}

ComponentScore component_score(const PolarityDistribution& d) {
  d.validate();
  const double polarized = d.pos + d.neg;
  if (polarized <= 0) return {50.0, true};
  return {100.0 * d.pos / polarized, false};
}

double compose_swbi(const std::map<Component, double>& scores) {
  std::string missing;
  Eigen::Matrix<double, 8, 1> v;
  for (std::size_t i = 0; i < kComponents.size(); ++i) {
    auto it = scores.find(kComponents[i]);
    if (it == scores.end()) {
      missing += (missing.empty() ? "" : ", ") + std::string(code(kComponents[i]));
      continue;
    }
    v[static_cast<Eigen::Index>(i)] = it->second;
  }
  if (!missing.empty()) throw std::invalid_argument("wellbeing: missing components: " + missing);
  return compose_swbi(v);
}

std::vector<PeriodValue> integrate_period(const TimedValues& daily, Period period, Aggregate aggregate) {
  if (daily.instants.size() != daily.values.size())
    throw std::invalid_argument("wellbeing: instants and values differ in length");
  if (daily.instants.empty()) throw std::invalid_argument("wellbeing: cannot integrate an empty series");
  std::map<std::string, PeriodValue> buckets;
  for (std::size_t i = 0; i < daily.instants.size(); ++i) {
    const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(daily.instants[i])};
    char label[16];
    if (period == Period::Month)
      std::snprintf(label, sizeof label, "%04d-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
    else
      std::snprintf(label, sizeof label, "%04d", static_cast<int>(ymd.year()));
    auto& bucket = buckets[label];
    bucket.period = label;
    bucket.value += daily.values[i];
    ++bucket.count;
  }
  std::vector<PeriodValue> out;
  out.reserve(buckets.size());
  for (auto& [label, bucket] : buckets) {
    if (aggregate == Aggregate::Mean) bucket.value /= static_cast<double>(bucket.count);
    out.push_back(bucket);
  }
  return out;
}

std::vector<PeriodValue> integrate_period(const AsyncSeries& daily, Period period, Aggregate aggregate) {
  if (!daily.origin()) throw std::invalid_argument("wellbeing: series '" + daily.name() + "' has no calendar origin");
  TimedValues raw;
  for (Eigen::Index i = 0; i < daily.size(); ++i) {
    raw.instants.push_back(time::add_days(*daily.origin(), daily.times()[i]));
    raw.values.push_back(daily.values()[i]);
  }
  return integrate_period(raw, period, aggregate);
}

WellBeingPanel build_panel(const std::map<CellKey, CellEstimate>& estimates) {
  std::map<std::pair<std::string, std::string>, PanelRow> rows;
  for (const auto& [key, cell] : estimates) {
    const auto& [period, unit, component] = key;
    auto& row = rows[{period, unit}];
    row.period = period;
    row.unit = unit;
    row.scores[static_cast<std::size_t>(component)] = component_score(cell.distribution).value;
    row.n_docs += cell.n_docs;
  }
  WellBeingPanel panel;
  panel.rows.reserve(rows.size());
  for (auto& [key, row] : rows) {
    std::map<Component, double> available;
    for (auto c : kComponents)
      if (auto s = row.score(c)) available.emplace(c, *s);
    if (available.size() == kComponents.size()) row.swbi = compose_swbi(available);
    panel.rows.push_back(std::move(row));
  }
  return panel;
}

void WellBeingPanel::write_csv(std::ostream& out) const {
  out << "period,unit";
  for (auto c : kCsvOrder) out << ',' << code(c);
  out << ",swbi,n_docs\n";
  auto cell = [](const std::optional<double>& v) { return v ? io::format_number(*v) : std::string(); };
  for (const auto& row : rows) {
    out << io::csv_escape(row.period) << ',' << io::csv_escape(row.unit);
    for (auto c : kCsvOrder) out << ',' << cell(row.score(c));
    out << ',' << cell(row.swbi) << ',' << row.n_docs << '\n';
  }
}

WellBeingPanel WellBeingPanel::read_csv(std::istream& in, const std::string& source) {
  const auto table = io::read_csv(in, source);
  const auto period_col = table.column("period");
  const auto unit_col = table.column("unit");
  const auto swbi_col = table.column("swbi");
  const auto docs_col = table.column("n_docs");
  std::array<std::size_t, 8> component_cols{};
  for (auto c : kComponents) component_cols[static_cast<std::size_t>(c)] = table.column(code(c));

  WellBeingPanel panel;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    const std::string where = source + ":" + std::to_string(r + 2);
    auto optional_number = [&](std::size_t col) -> std::optional<double> {
      if (fields[col].empty()) return std::nullopt;
      return io::parse_double(fields[col], where);
    };
    PanelRow row;
    row.period = fields[period_col];
    row.unit = fields[unit_col];
    for (std::size_t i = 0; i < 8; ++i) row.scores[i] = optional_number(component_cols[i]);
    row.swbi = optional_number(swbi_col);
    row.n_docs = static_cast<std::size_t>(io::parse_double(fields[docs_col], where));
    panel.rows.push_back(std::move(row));
  }
  return panel;
}

}  // namespace socialwell::wellbeing

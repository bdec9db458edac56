#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "socialwell/series.hpp"

namespace socialwell::wellbeing {

/// The eight well-being components.
enum class Component { Emo, Sat, Vit, Res, Fun, Tru, Rel, Wor };

inline constexpr std::array<Component, 8> kComponents{Component::Emo, Component::Sat, Component::Vit,
                                                      Component::Res, Component::Fun, Component::Tru,
                                                      Component::Rel, Component::Wor};

/// Column order of the panel CSV.
inline constexpr std::array<Component, 8> kCsvOrder{Component::Emo, Component::Fun, Component::Rel,
                                                    Component::Res, Component::Sat, Component::Tru,
                                                    Component::Vit, Component::Wor};

std::string_view code(Component c);
std::optional<Component> parse_component(std::string_view code);

/// Shares of -1 / 0 / +1 coded documents.
struct PolarityDistribution {
  double neg = 0;
  double neu = 0;
  double pos = 0;

  void validate() const;
};

struct ComponentScore {
  double value = 50;
  bool no_polarized_mass = false;  // value fell back to the midpoint
};

/// 100 * pos / (pos + neg); 50 when nothing is polarized.
ComponentScore component_score(const PolarityDistribution& d);

/// Arithmetic mean of the eight component scores.
template <typename Derived>
typename Derived::Scalar compose_swbi(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  if (scores.size() != 8) throw std::invalid_argument("wellbeing: exactly eight component scores are required");
  for (Eigen::Index i = 0; i < 8; ++i)
    if (!(scores(i) >= Scalar(0) && scores(i) <= Scalar(100)))
      throw std::invalid_argument("wellbeing: component score outside [0,100]");
  return scores.sum() / Scalar(8);
}

/// Same, keyed by component; missing components are listed in the error.
double compose_swbi(const std::map<Component, double>& scores);

enum class Period { Month, Year };
enum class Aggregate { Sum, Mean };

struct PeriodValue {
  std::string period;  // "YYYY-MM" or "YYYY"
  double value = 0;
  std::size_t count = 0;
};

/// Gross balance per calendar period: the sum (or mean) of the observations
/// falling in it. Requires a calendar origin on the series. Empty periods
/// are omitted.
std::vector<PeriodValue> integrate_period(const TimedValues& daily, Period period,
                                          Aggregate aggregate = Aggregate::Sum);
std::vector<PeriodValue> integrate_period(const AsyncSeries& daily, Period period,
                                          Aggregate aggregate = Aggregate::Sum);

struct CellEstimate {
  PolarityDistribution distribution;
  std::size_t n_docs = 0;
};

using CellKey = std::tuple<std::string, std::string, Component>;  // period, unit, component

struct PanelRow {
  std::string period;
  std::string unit;
  std::array<std::optional<double>, 8> scores;  // indexed like kComponents
  std::optional<double> swbi;
  std::size_t n_docs = 0;

  bool complete() const { return swbi.has_value(); }
  std::optional<double> score(Component c) const { return scores[static_cast<std::size_t>(c)]; }
};

struct WellBeingPanel {
  std::vector<PanelRow> rows;  // sorted by (period, unit)

  void write_csv(std::ostream& out) const;
  static WellBeingPanel read_csv(std::istream& in, const std::string& source);
};

/// Scores every cell and composes complete rows; rows missing a component
/// keep their available scores and a null composite.
WellBeingPanel build_panel(const std::map<CellKey, CellEstimate>& estimates);

}  // namespace socialwell::wellbeing

#include "socialwell/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include "socialwell/random.hpp"

namespace socialwell::synth {

namespace {

void check_simplex(const std::vector<double>& p, const std::string& what) {
  double sum = 0;
  for (double v : p) {
    if (!(v >= 0 && v <= 1)) throw std::invalid_argument("synth: " + what + " entries must lie in [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1) > 1e-9) throw std::invalid_argument("synth: " + what + " must sum to 1");
}

std::size_t draw_categorical(random::Xoshiro256& rng, const std::vector<double>& weights, double total) {
  const double u = rng.uniform() * total;
  double cumulative = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  return weights.size() - 1;
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string("synth: ") + what + " spec must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument(std::string("synth: unknown ") + what + " spec key '" + key + "'");
}

std::string stem_name(std::size_t category, std::size_t k) {
  return "c" + std::to_string(category) + "w" + std::to_string(k);
}

}  // namespace

void CorpusSpec::validate() const {
  if (categories.size() < 2) throw std::invalid_argument("synth: at least two categories are required");
  if (mixture.size() != categories.size()) throw std::invalid_argument("synth: mixture length differs from categories");
  check_simplex(mixture, "mixture");
  if (train_mixture) {
    if (train_mixture->size() != categories.size())
      throw std::invalid_argument("synth: train_mixture length differs from categories");
    check_simplex(*train_mixture, "train_mixture");
  }
  if (!emission.empty()) {
    if (emission.size() != categories.size()) throw std::invalid_argument("synth: emission needs one row per category");
    for (const auto& row : emission) {
      if (row.size() != stems_per_category)
        throw std::invalid_argument("synth: emission rows need stems_per_category entries");
      check_simplex(row, "emission row");
    }
  }
  if (!(overlap >= 0 && overlap <= 1)) throw std::invalid_argument("synth: overlap must lie in [0,1]");
  if (stems_per_category == 0 || tokens_per_doc == 0) throw std::invalid_argument("synth: stem and token counts must be positive");
  if (overlap > 0 && shared_stems == 0) throw std::invalid_argument("synth: overlap > 0 needs shared stems");
}

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"categories", "mixture", "train_mixture", "emission", "overlap", "stems_per_category",
                          "shared_stems", "tokens_per_doc", "n_train", "n_test"},
                      "corpus");
  CorpusSpec spec;
  spec.categories = j.at("categories").get<std::vector<std::string>>();
  spec.mixture = j.at("mixture").get<std::vector<double>>();
  if (j.contains("train_mixture")) spec.train_mixture = j.at("train_mixture").get<std::vector<double>>();
  if (j.contains("emission")) spec.emission = j.at("emission").get<std::vector<std::vector<double>>>();
  spec.overlap = j.value("overlap", 0.0);
  spec.stems_per_category = j.value("stems_per_category", spec.stems_per_category);
  spec.shared_stems = j.value("shared_stems", spec.shared_stems);
  spec.tokens_per_doc = j.value("tokens_per_doc", spec.tokens_per_doc);
  spec.n_train = j.at("n_train").get<std::size_t>();
  spec.n_test = j.at("n_test").get<std::size_t>();
  spec.validate();
  return spec;
}

GeneratedCorpus gen_corpus(const CorpusSpec& spec) {
  spec.validate();
  random::Xoshiro256 rng(spec.seed);
  const std::size_t m = spec.categories.size();
  const std::vector<double> uniform_row(spec.stems_per_category, 1.0);

  auto make_doc = [&](std::size_t category) {
    const auto& weights = spec.emission.empty() ? uniform_row : spec.emission[category];
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::string text;
    for (std::size_t t = 0; t < spec.tokens_per_doc; ++t) {
      if (!text.empty()) text += ' ';
      if (rng.uniform() < spec.overlap)
        text += "sw" + std::to_string(rng.below(spec.shared_stems));
      else
        text += stem_name(category, draw_categorical(rng, weights, total));
    }
    return text;
  };

  auto id = [](const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%06zu", prefix, i + 1);
    return std::string(buf);
  };

  GeneratedCorpus out;
  const auto& train_mix = spec.train_mixture ? *spec.train_mixture : spec.mixture;
  for (std::size_t i = 0; i < spec.n_train; ++i) {
    const std::size_t c = draw_categorical(rng, train_mix, 1.0);
    out.train.push_back({id("train", i), make_doc(c), spec.categories[c], std::nullopt, std::nullopt});
  }
  out.truth = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < spec.n_test; ++i) {
    const std::size_t c = draw_categorical(rng, spec.mixture, 1.0);
    out.test.push_back({id("test", i), make_doc(c), std::nullopt, std::nullopt, std::nullopt});
    out.test_categories.push_back(c);
    out.truth[static_cast<Eigen::Index>(c)] += 1;
  }
  if (spec.n_test > 0) out.truth /= static_cast<double>(spec.n_test);
  return out;
}

Sampling Sampling::parse(const std::string& text) {
  if (text == "daily") return {Kind::Daily, 1};
  if (text == "weekly") return {Kind::Weekly, 1};
  if (text.rfind("thinned:", 0) == 0) {
    const double q = std::stod(text.substr(8));
    if (!(q > 0 && q <= 1)) throw std::invalid_argument("synth: thinning probability must lie in (0,1]");
    return {Kind::Thinned, q};
  }
  throw std::invalid_argument("synth: unknown sampling scheme '" + text + "'");
}

std::string Sampling::to_string() const {
  switch (kind) {
    case Kind::Daily: return "daily";
    case Kind::Weekly: return "weekly";
    case Kind::Thinned: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "thinned:%.12g", keep_probability);
      return buf;
    }
  }
  return "?";
}

void SeriesSpec::validate() const {
  if (!(length >= 14)) throw std::invalid_argument("synth: series length must be at least 14 days");
  if (substeps < 1) throw std::invalid_argument("synth: substeps must be >= 1");
  if (!std::isfinite(lag)) throw std::invalid_argument("synth: lag must be finite");
  if (!(noise >= 0) || !(volatility > 0)) throw std::invalid_argument("synth: noise must be >= 0 and volatility > 0");
  if (!(correlation >= -1 && correlation <= 1)) throw std::invalid_argument("synth: correlation must lie in [-1,1]");
  if (!(seasonal_period > 0)) throw std::invalid_argument("synth: seasonal period must be positive");
  time::parse_instant(start);
}

SeriesSpec SeriesSpec::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"latent", "lag", "x_sampling", "y_sampling", "noise", "length", "substeps", "volatility",
                          "correlation", "seasonal_period", "seasonal_amplitude", "start"},
                      "series");
  SeriesSpec spec;
  const std::string latent = j.value("latent", std::string("random_walk"));
  if (latent == "random_walk")
    spec.latent = Latent::RandomWalk;
  else if (latent == "seasonal")
    spec.latent = Latent::Seasonal;
  else
    throw std::invalid_argument("synth: unknown latent process '" + latent + "'");
  spec.lag = j.value("lag", 0.0);
  spec.x_sampling = Sampling::parse(j.value("x_sampling", std::string("daily")));
  spec.y_sampling = Sampling::parse(j.value("y_sampling", std::string("daily")));
  spec.noise = j.value("noise", 0.0);
  spec.length = j.value("length", spec.length);
  spec.substeps = j.value("substeps", spec.substeps);
  spec.volatility = j.value("volatility", spec.volatility);
  spec.correlation = j.value("correlation", spec.correlation);
  spec.seasonal_period = j.value("seasonal_period", spec.seasonal_period);
  spec.seasonal_amplitude = j.value("seasonal_amplitude", spec.seasonal_amplitude);
  spec.start = j.value("start", spec.start);
  spec.validate();
  return spec;
}

LaggedPair gen_lagged_pair(const SeriesSpec& spec) {
  spec.validate();
  random::Xoshiro256 rng(spec.seed);
  const double per_day = static_cast<double>(spec.substeps);
  const long lag_steps = std::lround(spec.lag * per_day);
  const long n = static_cast<long>(std::floor(spec.length * per_day));
  const long lo = std::min(0L, -lag_steps), hi = std::max(n, n - lag_steps);
  const double step_sd = spec.volatility / std::sqrt(per_day);

  std::vector<double> w(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t k = 1; k < w.size(); ++k) w[k] = w[k - 1] + step_sd * rng.normal();
  std::vector<double> z(static_cast<std::size_t>(n + 1), 0.0);
  for (std::size_t k = 1; k < z.size(); ++k) z[k] = z[k - 1] + step_sd * rng.normal();

  auto latent_x = [&](long k) {
    double v = w[static_cast<std::size_t>(k - lo)];
    if (spec.latent == Latent::Seasonal)
      v += spec.seasonal_amplitude * std::sin(2 * std::numbers::pi * static_cast<double>(k) / per_day / spec.seasonal_period);
    return v;
  };
  const double rho = spec.correlation, rho_c = std::sqrt(std::max(0.0, 1 - rho * rho));
  auto latent_y = [&](long k) { return rho * latent_x(k - lag_steps) + rho_c * z[static_cast<std::size_t>(k)]; };

  auto observe = [&](const Sampling& sampling, auto&& latent) {
    std::vector<long> grid;
    switch (sampling.kind) {
      case Sampling::Kind::Daily:
        for (long k = 0; k < n; k += spec.substeps) grid.push_back(k);
        break;
      case Sampling::Kind::Weekly:
        for (long k = 0; k < n; k += 7L * spec.substeps) grid.push_back(k);
        break;
      case Sampling::Kind::Thinned:
        for (long k = 0; k < n; ++k)
          if (rng.uniform() < sampling.keep_probability) grid.push_back(k);
        if (grid.size() < 2) grid = {0, n - 1};
        break;
    }
    Eigen::VectorXd times(static_cast<Eigen::Index>(grid.size())), values(times.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto e = static_cast<Eigen::Index>(i);
      times[e] = static_cast<double>(grid[i]) / per_day;
      values[e] = latent(grid[i]) + (spec.noise > 0 ? spec.noise * rng.normal() : 0.0);
    }
    return std::pair{times, values};
  };

  const auto origin = time::parse_instant(spec.start);
  auto [tx, vx] = observe(spec.x_sampling, latent_x);
  auto [ty, vy] = observe(spec.y_sampling, latent_y);
  return {AsyncSeries(std::move(tx), std::move(vx), "x", origin), AsyncSeries(std::move(ty), std::move(vy), "y", origin),
          static_cast<double>(lag_steps) / per_day};
}

}  // namespace socialwell::synth

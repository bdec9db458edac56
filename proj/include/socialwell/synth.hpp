#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "socialwell/series.hpp"
#include "socialwell/textproc.hpp"

namespace socialwell::synth {

/// Synthetic labeled corpus. Each category owns `stems_per_category`
/// private stems; `shared_stems` are common to all. A document draws
/// `tokens_per_doc` tokens, each from the shared pool with probability
/// `overlap` and otherwise from its category's pool by `emission` weights.
struct CorpusSpec {
  std::vector<std::string> categories;
  std::vector<double> mixture;                      // test-set category probabilities
  std::optional<std::vector<double>> train_mixture;  // defaults to `mixture`
  std::vector<std::vector<double>> emission;        // per category; empty means uniform
  double overlap = 0;
  std::size_t stems_per_category = 4;
  std::size_t shared_stems = 4;
  std::size_t tokens_per_doc = 3;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Parses the JSON spec file format (every field above except `seed`).
  /// Unknown keys are rejected.
  static CorpusSpec from_json(const nlohmann::json& j);
};

struct GeneratedCorpus {
  std::vector<text::Document> train;  // labeled
  std::vector<text::Document> test;   // unlabeled
  std::vector<std::size_t> test_categories;  // hidden true category per test document
  Eigen::VectorXd truth;               // realized test mixture
};

/// Deterministic given spec.seed. Draw order: every training document
/// (category, then tokens), then every test document.
GeneratedCorpus gen_corpus(const CorpusSpec& spec);

enum class Latent { RandomWalk, Seasonal };

struct Sampling {
  enum class Kind { Daily, Weekly, Thinned } kind = Kind::Daily;
  double keep_probability = 1;  // Thinned only, per latent grid point

  static Sampling parse(const std::string& text);  // "daily", "weekly", "thinned:<q>"
  std::string to_string() const;
};

/// Latent process on a grid of `substeps` points per day. x observes
/// W(t); y observes rho W(t - lag) + sqrt(1 - rho^2) Z(t), with W and Z
/// independent Gaussian random walks (plus a sinusoid for Seasonal).
/// Observations carry iid N(0, noise^2) measurement error.
struct SeriesSpec {
  Latent latent = Latent::RandomWalk;
  double lag = 0;  // days; positive means x leads y
  Sampling x_sampling;
  Sampling y_sampling;
  double noise = 0;
  double length = 500;  // days
  int substeps = 1;
  double volatility = 1;  // per-day increment sd of W and Z
  double correlation = 1;
  double seasonal_period = 365;
  double seasonal_amplitude = 0;
  std::string start = "2012-01-01";  // calendar date of time 0
  std::uint64_t seed = 0;

  void validate() const;
  static SeriesSpec from_json(const nlohmann::json& j);
};

struct LaggedPair {
  AsyncSeries x;
  AsyncSeries y;
  double true_lag;  // nominal lag rounded to the latent grid
};

/// Deterministic given spec.seed. Draw order: W increments, Z increments,
/// x thinning, x noise, y thinning, y noise.
LaggedPair gen_lagged_pair(const SeriesSpec& spec);

}  // namespace socialwell::synth

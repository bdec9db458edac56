// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "socialwell/cli.hpp"
#include "socialwell/io.hpp"
#include "socialwell/isa.hpp"
#include "socialwell/leadlag.hpp"
#include "socialwell/random.hpp"
#include "socialwell/stats.hpp"
#include "socialwell/synth.hpp"
#include "socialwell/wellbeing.hpp"

using namespace socialwell;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

text::TokenizerConfig unigrams() {
  text::TokenizerConfig c;
  c.ngram_orders = {1};
  return c;
}

struct Encoded {
  text::EncodedCorpus train, test;
};

Encoded encode(const synth::GeneratedCorpus& g, const text::TokenizerConfig& config) {
  std::vector<text::Document> all = g.train;
  all.insert(all.end(), g.test.begin(), g.test.end());
  const auto lex = text::build_lexicon(all, config);
  return {text::encode(g.train, lex), text::encode(g.test, lex)};
}

std::vector<double> as_vector(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------- 1

Verdict yearly_mean_identity() {
  // year, published composite, then emo sat vit res fun tru rel wor
  const double rows[4][9] = {
      {48.87, 60.55, 67.76, 34.10, 55.10, 43.88, 59.22, 53.91, 16.44},
      {52.22, 57.32, 73.31, 37.35, 57.19, 55.03, 64.04, 58.04, 15.50},
      {49.69, 48.24, 68.26, 39.73, 56.11, 52.37, 62.59, 55.15, 15.10},
      {48.50, 49.50, 54.57, 55.35, 54.30, 36.72, 40.40, 57.81, 39.33},
  };
  double worst = 0;
  for (const auto& row : rows) {
    const Eigen::Map<const Eigen::Matrix<double, 8, 1>> components(row + 1);
    worst = std::max(worst, std::abs(wellbeing::compose_swbi(components) - row[0]));
  }
  return {worst <= 0.005, "max |mean - published| = " + fmt(worst) + " over 2012-2015"};
}

// ---------------------------------------------------------------- 2

Verdict isa_recovery() {
  // Disjoint support with one private stem per category puts the test
  // distribution in the column span, so recovery is exact.
  double exact_worst = 0;
  random::Xoshiro256 mix_rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    synth::CorpusSpec s;
    const std::size_t m = 2 + rep % 4;
    for (std::size_t c = 0; c < m; ++c) s.categories.push_back("k" + std::to_string(c));
    std::vector<double> mix(m);
    double total = 0;
    for (auto& v : mix) total += v = (rep == 0 && &v != &mix[0]) ? 0.0 : mix_rng.uniform();
    for (auto& v : mix) v /= total;
    s.mixture = mix;
    s.train_mixture = std::vector<double>(m, 1.0 / static_cast<double>(m));
    s.overlap = 0;
    s.stems_per_category = 1;
    s.n_train = 200;
    s.n_test = 1000;
    s.seed = 100 + static_cast<std::uint64_t>(rep);
    const auto g = synth::gen_corpus(s);
    const auto e = encode(g, text::TokenizerConfig{});
    const auto cond = isa::estimate_conditional(e.train, isa::CategorySet(s.categories));
    const auto r = isa::estimate_inverse(cond, e.test);
    exact_worst = std::max(exact_worst, (r.probs - g.truth).cwiseAbs().maxCoeff());
  }

  double noisy_worst = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    synth::CorpusSpec s;
    s.categories = {"A", "B", "C"};
    s.mixture = {0.5, 0.3, 0.2};
    s.overlap = 0.5;
    s.n_train = 2000;
    s.n_test = 10000;
    s.seed = seed;
    const auto g = synth::gen_corpus(s);
    const auto e = encode(g, unigrams());
    const auto cond = isa::estimate_conditional(e.train, isa::CategorySet(s.categories));
    noisy_worst = std::max(noisy_worst, (isa::estimate_inverse(cond, e.test).probs - g.truth).cwiseAbs().maxCoeff());
  }
  return {exact_worst < 1e-10 && noisy_worst < 0.02,
          "overlap 0: max error " + fmt(exact_worst) + " (20 mixtures); overlap 0.5: max error " + fmt(noisy_worst) +
              " (50 seeds)"};
}

// ---------------------------------------------------------------- 3

Verdict variance_reduction() {
  const int seeds = 200;
  MatrixXd inverse(seeds, 3), baseline(seeds, 3);
  for (int k = 0; k < seeds; ++k) {
    synth::CorpusSpec s;
    s.categories = {"A", "B", "C"};
    s.mixture = {0.5, 0.3, 0.2};
    s.overlap = 0.8;
    s.n_train = 500;
    s.n_test = 2000;
    s.seed = 5000 + static_cast<std::uint64_t>(k);
    const auto g = synth::gen_corpus(s);
    const auto e = encode(g, unigrams());
    const auto cond = isa::estimate_conditional(e.train, isa::CategorySet(s.categories));
    inverse.row(k) = isa::estimate_inverse(cond, e.test).probs.transpose();
    baseline.row(k) = isa::classify_baseline(cond, std::nullopt, e.test).aggregate.probs.transpose();
  }
  auto sd = [](const MatrixXd& m) {
    const MatrixXd centered = m.rowwise() - m.colwise().mean();
    return VectorXd((centered.colwise().squaredNorm() / static_cast<double>(m.rows() - 1)).cwiseSqrt().transpose());
  };
  const VectorXd si = sd(inverse), sb = sd(baseline);
  const bool pass = (si.array() < sb.array()).all();
  std::string detail = "MC sd inverse vs baseline per category:";
  for (Eigen::Index c = 0; c < 3; ++c) detail += " " + fmt(si[c]) + "<" + fmt(sb[c]);
  return {pass, detail};
}

// ---------------------------------------------------------------- 4, 5

Verdict hy_synchronous() {
  std::mt19937_64 gen(404);
  std::normal_distribution<double> z;
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(gen() % 199);
    std::vector<double> t(n), x(n), y(n);
    double clock = 0;
    for (int i = 0; i < n; ++i) {
      clock += 0.01 + std::abs(z(gen));
      t[i] = clock;
      x[i] = z(gen);
      y[i] = z(gen);
    }
    const AsyncSeries sx(Eigen::Map<VectorXd>(t.data(), n), Eigen::Map<VectorXd>(x.data(), n));
    const AsyncSeries sy(Eigen::Map<VectorXd>(t.data(), n), Eigen::Map<VectorXd>(y.data(), n));
    worst = std::max(worst, std::abs(leadlag::hy_covariance(sx, sy) - oracle::realized_covariance(x, y)));
  }
  return {worst < 1e-12, "max |HY - realized covariance| = " + fmt(worst) + " over 100 pairs"};
}

Verdict hy_sweep_equivalence() {
  std::mt19937_64 gen(505);
  std::uniform_real_distribution<double> u(0, 50);
  std::normal_distribution<double> z;
  auto make = [&](int n) {
    std::set<double> ts;
    while (static_cast<int>(ts.size()) < n) ts.insert(u(gen));
    VectorXd t(n), v(n);
    int i = 0;
    double level = 0;
    for (double s : ts) t[i] = s, v[i++] = level += z(gen);
    return std::pair{t, v};
  };
  double worst = 0;
  int compared = 0;
  while (compared < 500) {
    const auto [tx, x] = make(2 + static_cast<int>(gen() % 199));
    const auto [ty, y] = make(2 + static_cast<int>(gen() % 199));
    double fast, slow;
    try {
      fast = leadlag::hy_covariance(tx, x, ty, y);
      slow = leadlag::reference::hy_covariance(tx, x, ty, y);
    } catch (const std::invalid_argument&) {
      continue;  // no overlapping intervals at all
    }
    worst = std::max(worst, std::abs(fast - slow));
    const double enumerated = oracle::hy_enumerate(as_vector(tx), as_vector(x), as_vector(ty), as_vector(y));
    worst = std::max(worst, std::abs(fast - enumerated));
    ++compared;
  }
  return {worst < 1e-12, "max |sweep - quadratic| = " + fmt(worst) + " over 500 pairs (n, m <= 200)"};
}

// ---------------------------------------------------------------- 6

Verdict lead_lag_recovery() {
  synth::SeriesSpec noiseless;
  noiseless.lag = 3;
  noiseless.seed = 1;
  const auto pair = synth::gen_lagged_pair(noiseless);
  const double exact = leadlag::estimate_lead_lag(pair.x, pair.y, leadlag::LagGrid(5, 1)).theta_hat;

  const auto fixture = nlohmann::json::parse(io::read_file(std::string(SOCIALWELL_FIXTURES) + "/leadlag_mixed.json"));
  if (fixture["pinned_rate"].is_null()) return {false, "mixed-frequency rate not pinned; run leadlag_oracle_run --write"};
  const double pinned = fixture["pinned_rate"].get<double>();
  auto spec = synth::SeriesSpec::from_json(fixture["spec"]);
  const leadlag::LagGrid grid(fixture["grid"]["delta"].get<double>(), fixture["grid"]["step"].get<double>());
  const auto first = fixture["first_seed"].get<std::uint64_t>(), seeds = fixture["seeds"].get<std::uint64_t>();
  const double tol = fixture["tolerance_days"].get<double>();
  std::size_t hits = 0;
  for (std::uint64_t s = first; s < first + seeds; ++s) {
    spec.seed = s;
    const auto p = synth::gen_lagged_pair(spec);
    if (std::abs(leadlag::estimate_lead_lag(p.x, p.y, grid).theta_hat - p.true_lag) <= tol) ++hits;
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(seeds);
  return {exact == 3 && rate >= pinned && pinned >= 0.9,
          "noiseless daily lag 3 -> " + fmt(exact) + "; daily/weekly lag 4 within +/-1 day: " + std::to_string(hits) + "/" +
              std::to_string(seeds) + " (pinned " + fmt(pinned) + ")"};
}

// ---------------------------------------------------------------- 7

Verdict antisymmetry_and_scale() {
  random::Xoshiro256 rng(707);
  const char* schemes[] = {"daily", "weekly", "thinned:0.5"};
  int unique = 0, antisymmetric = 0, ties_equal = 0;
  const int fixtures = 100;
  for (int k = 0; k < fixtures; ++k) {
    synth::SeriesSpec s;
    s.lag = static_cast<double>(rng.below(9)) - 4;
    s.x_sampling = synth::Sampling::parse(schemes[rng.below(3)]);
    s.y_sampling = synth::Sampling::parse(schemes[rng.below(3)]);
    s.noise = 0.2 * rng.uniform();
    s.length = 120;
    s.seed = 7000 + static_cast<std::uint64_t>(k);
    const auto p = synth::gen_lagged_pair(s);
    const leadlag::LagGrid grid(5, 1);
    const auto forward = leadlag::estimate_lead_lag(p.x, p.y, grid);
    const auto backward = leadlag::estimate_lead_lag(p.y, p.x, grid);
    if (forward.ties.size() == 1 && backward.ties.size() == 1) {
      ++unique;
      if (forward.theta_hat == -backward.theta_hat) ++antisymmetric;
    }
    const double a = 0.01 + 100 * rng.uniform(), b = 0.01 + 100 * rng.uniform();
    const auto scaled = leadlag::estimate_lead_lag(p.x.with_values(a * p.x.values()), p.y.with_values(b * p.y.values()), grid);
    if (scaled.ties == forward.ties) ++ties_equal;
  }
  return {unique > 0 && antisymmetric == unique && ties_equal == fixtures,
          "antisymmetric on " + std::to_string(antisymmetric) + "/" + std::to_string(unique) +
              " unique-maximizer fixtures; ties invariant under rescaling on " + std::to_string(ties_equal) + "/" +
              std::to_string(fixtures)};
}

// ---------------------------------------------------------------- 8

Verdict cca_contract() {
  std::mt19937_64 gen(808);
  std::normal_distribution<double> z;
  double var_err = 0, cross = 0, oracle_err = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 6 + static_cast<Eigen::Index>(gen() % 25), py = 2 + static_cast<Eigen::Index>(gen() % 3);
    MatrixXd x(n, 2), y(n, py);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) x(i, j) = z(gen);
      for (Eigen::Index j = 0; j < py; ++j) y(i, j) = z(gen);
    }
    y.col(0) += 0.7 * x.col(1);
    const auto fit = stats::cca(x, y);
    auto check_side = [&](const MatrixXd& scores) {
      const MatrixXd centered = scores.rowwise() - scores.colwise().mean();
      const MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
      for (Eigen::Index a = 0; a < cov.rows(); ++a) {
        var_err = std::max(var_err, std::abs(cov(a, a) - 1));
        for (Eigen::Index b = 0; b < a; ++b) cross = std::max(cross, std::abs(cov(a, b)));
      }
    };
    check_side(fit.x_scores);
    check_side(fit.y_scores);
    const auto [r1, r2] = oracle::cca_two_by_brute_force(x, y);
    oracle_err = std::max({oracle_err, std::abs(fit.correlations[0] - r1), std::abs(fit.correlations[1] - r2)});
  }
  const double lambda1 = stats::wilks_test(Eigen::Vector2d(0.9, 0.3), 40, 12, 8)[0].lambda;
  const bool pass = var_err < 1e-9 && cross < 1e-8 && oracle_err < 1e-6 && std::abs(lambda1 - 0.1729) <= 1e-4;
  return {pass, "variance err " + fmt(var_err) + ", cross-axis " + fmt(cross) + ", oracle err " + fmt(oracle_err) +
                    " (20 instances); Wilks L1(0.9, 0.3) = " + fmt(lambda1, 6)};
}

// ---------------------------------------------------------------- 9

Verdict ols_oracle() {
  std::mt19937_64 gen(909);
  std::normal_distribution<double> z;
  double worst = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 40, p = 1 + static_cast<Eigen::Index>(gen() % 12);
    MatrixXd x(n, p);
    VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = z(gen);
      y[i] = 2 + z(gen);
    }
    y += x * VectorXd::LinSpaced(p, -1, 1);
    const auto fit = stats::ols(y, x, true);
    const auto o = oracle::ols_normal_equations(y, x, true);
    worst = std::max({worst, (fit.coefficients - o.beta).cwiseAbs().maxCoeff(), rel(fit.r_squared, o.r_squared),
                      rel(fit.f_stat, o.f_stat), rel(fit.aic, o.aic), rel(fit.bic, o.bic)});
  }
  return {worst < 1e-10, "max discrepancy " + fmt(worst) + " over 50 instances (n = 40, p <= 12)"};
}

// ---------------------------------------------------------------- 10

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = socialwell::cli::run(args, out, err);
  if (code != 0) throw std::runtime_error("command failed (" + std::to_string(code) + "): " + err.str());
  return code;
}

/// synth -> isa -> swbi -> leadlag -> cca/regress, all through the CLI.
void run_pipeline(const fs::path& dir, std::uint64_t seed, unsigned jobs) {
  const fs::path work = dir / "work", out = dir / "out", est = out / "estimates";
  fs::create_directories(work);
  fs::create_directories(est);
  const std::string jobs_arg = std::to_string(jobs);
  const char* components[] = {"emo", "sat", "vit", "res", "fun", "tru", "rel", "wor"};
  const int units = 10, days = 8;

  random::Xoshiro256 rng(seed);
  std::vector<std::string> unit_names;
  for (int u = 0; u < units; ++u) unit_names.push_back("u" + std::string(u < 9 ? "0" : "") + std::to_string(u + 1));
  std::uint64_t cell = 0;
  for (int d = 0; d < days; ++d) {
    const std::string day = "2013-05-0" + std::to_string(d + 1);
    for (const auto& unit : unit_names)
      for (const char* comp : components) {
        const double pos = 0.2 + 0.5 * rng.uniform(), neg = (1 - pos) * rng.uniform();
        nlohmann::json spec = {{"categories", {"-1", "0", "1"}},
                               {"mixture", {neg, 1 - pos - neg, pos}},
                               {"train_mixture", {1.0 / 3, 1.0 / 3, 1.0 / 3}},
                               {"overlap", 0.3},
                               {"n_train", 90},
                               {"n_test", 120}};
        io::write_file_atomic(work / "spec.json", spec.dump());
        const std::string cell_seed = std::to_string(random::substream_seed(seed, cell++));
        cli({"synth", "corpus", "--spec", (work / "spec.json").string(), "--seed", cell_seed, "--out-train",
             (work / "train.jsonl").string(), "--out-test", (work / "test.jsonl").string(), "--out-truth",
             (work / "truth.json").string()});
        cli({"--jobs", jobs_arg, "isa", "estimate", "--train", (work / "train.jsonl").string(), "--test",
             (work / "test.jsonl").string(), "--cats=-1,0,1", "--off-topic", "0", "--ngrams", "1", "--bootstrap", "100",
             "--seed", cell_seed, "--out", (est / (day + "__" + unit + "__" + comp + ".json")).string()});
      }
  }
  cli({"swbi", "build", "--estimates", est.string(), "--out", (out / "panel.csv").string()});

  std::ifstream panel_in(out / "panel.csv");
  const auto panel = wellbeing::WellBeingPanel::read_csv(panel_in, "panel.csv");
  std::map<std::string, std::string> series;
  std::map<std::string, std::array<double, 8>> unit_means;
  for (const auto& row : panel.rows) {
    auto& csv = series[row.unit];
    if (csv.empty()) csv = "ts,value\n";
    csv += row.period + "," + io::format_number(*row.swbi) + "\n";
    for (std::size_t c = 0; c < 8; ++c) unit_means[row.unit][c] += *row.scores[c] / days;
  }
  io::write_file_atomic(work / "x.csv", series[unit_names[0]]);
  io::write_file_atomic(work / "y.csv", series[unit_names[1]]);
  cli({"--jobs", jobs_arg, "leadlag", "--x", (work / "x.csv").string(), "--y", (work / "y.csv").string(), "--delta", "2",
       "--step", "1", "--out", (out / "leadlag.json").string()});

  std::string swbi_csv = "unit,emo,sat,vit\n", bes_csv = "unit,income,health,trust\n";
  for (const auto& unit : unit_names) {
    const auto& m = unit_means[unit];
    swbi_csv += unit + "," + io::format_number(m[0]) + "," + io::format_number(m[1]) + "," + io::format_number(m[2]) + "\n";
    bes_csv += unit;
    for (int k = 0; k < 3; ++k) bes_csv += "," + io::format_number(0.1 * m[static_cast<std::size_t>(k)] + rng.normal());
    bes_csv += "\n";
  }
  io::write_file_atomic(work / "swbi.csv", swbi_csv);
  io::write_file_atomic(work / "bes.csv", bes_csv);
  cli({"cca", "--x", (work / "bes.csv").string(), "--y", (work / "swbi.csv").string(), "--out", (out / "cca.json").string(),
       "--scores-out", (out / "cca_scores.csv").string()});
  cli({"regress", "--y", (work / "swbi.csv").string() + ":emo", "--x", (work / "bes.csv").string(), "--out",
       (out / "regress.json").string()});
}

Verdict end_to_end_determinism() {
  const fs::path a = oracle::temp_dir("accept-a"), b = oracle::temp_dir("accept-b");
  std::size_t files = 0, differing = 0;
  try {
    run_pipeline(a, 20240501, 1);
    run_pipeline(b, 20240501, 2);
    for (const auto& entry : fs::recursive_directory_iterator(a / "out")) {
      if (!entry.is_regular_file()) continue;
      ++files;
      const fs::path twin = b / "out" / fs::relative(entry.path(), a / "out");
      if (!fs::exists(twin) || io::read_file(entry.path()) != io::read_file(twin)) ++differing;
    }
  } catch (const std::exception& e) {
    fs::remove_all(a);
    fs::remove_all(b);
    return {false, std::string("pipeline error: ") + e.what()};
  }
  fs::remove_all(a);
  fs::remove_all(b);
  return {files > 0 && differing == 0,
          std::to_string(files - differing) + "/" + std::to_string(files) + " outputs byte-identical (1 vs 2 workers)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"published yearly SWBI mean identity", yearly_mean_identity},
      {"iSA exact and approximate recovery", isa_recovery},
      {"variance reduction over the baseline", variance_reduction},
      {"HY synchronous degeneracy", hy_synchronous},
      {"HY sweep equals quadratic reference", hy_sweep_equivalence},
      {"lead-lag recovery", lead_lag_recovery},
      {"antisymmetry and scale invariance", antisymmetry_and_scale},
      {"CCA contract", cca_contract},
      {"OLS oracle equivalence", ols_oracle},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << i + 1 << ". " << criteria[i].first << " -- "
              << v.detail << " [" << fmt(secs, 2) << "s]" << std::endl;
    if (!v.pass) ++failed;
  }
  return failed;
}

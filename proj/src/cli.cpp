#include "socialwell/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "socialwell/io.hpp"
#include "socialwell/isa.hpp"
#include "socialwell/leadlag.hpp"
#include "socialwell/series.hpp"
#include "socialwell/stats.hpp"
#include "socialwell/synth.hpp"
#include "socialwell/textproc.hpp"
#include "socialwell/wellbeing.hpp"

namespace socialwell::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Bad flag combinations detected after parsing; reported like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Outputs are staged and only written once the whole computation succeeded.
class Outputs {
 public:
  void add(const std::string& path, std::string content) { files_.emplace_back(path, std::move(content)); }
  void commit() const {
    for (const auto& [path, content] : files_) io::write_file_atomic(path, content);
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

Json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return io::round12(v);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void require_input(const std::string& path) {
  if (!fs::is_regular_file(path)) throw std::runtime_error("cannot open input file '" + path + "'");
}

void require_input_dir(const std::string& path) {
  if (!fs::is_directory(path)) throw std::runtime_error("cannot open input directory '" + path + "'");
}

void require_output(const std::string& path) {
  const fs::path p(path);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw std::runtime_error("output directory '" + dir.string() + "' for '" + path + "' does not exist");
}

std::istringstream open_text(const std::string& path) { return std::istringstream(io::read_file(path)); }

struct TokenizerFlags {
  std::string ngrams = "1,2";
  std::size_t min_df = 2;
  std::string stemmer = "none";
  bool no_casefold = false;

  void bind(CLI::App* app) {
    app->add_option("--ngrams", ngrams, "Comma-separated n-gram orders")->capture_default_str();
    app->add_option("--min-df", min_df, "Minimum document frequency of a stem")->capture_default_str();
    app->add_option("--stemmer", stemmer, "Stemmer: none or light")->capture_default_str();
    app->add_flag("--no-casefold", no_casefold, "Keep letter case");
  }

  text::TokenizerConfig config() const {
    text::TokenizerConfig c;
    c.case_fold = !no_casefold;
    c.stemmer = stemmer;
    c.min_df = min_df;
    c.ngram_orders.clear();
    std::istringstream ss(ngrams);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        c.ngram_orders.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw UsageError("--ngrams expects comma-separated integers, got '" + ngrams + "'");
      }
    }
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

isa::CategorySet make_categories(const std::vector<std::string>& cats, const std::string& off_topic) {
  std::size_t d0 = 0;
  if (!off_topic.empty()) {
    auto it = std::find(cats.begin(), cats.end(), off_topic);
    if (it == cats.end()) throw UsageError("--off-topic '" + off_topic + "' is not in --cats");
    d0 = static_cast<std::size_t>(it - cats.begin());
  }
  return isa::CategorySet(cats, d0);
}

// ---------------------------------------------------------------- isa

struct IsaTrain {
  std::string corpus, lexicon_out, off_topic;
  std::vector<std::string> cats;
  TokenizerFlags tok;

  void bind(CLI::App* app) {
    app->add_option("--corpus", corpus, "Labeled corpus (JSON lines)")->required();
    app->add_option("--cats", cats, "Categories, D0 first unless --off-topic")->required()->delimiter(',');
    app->add_option("--off-topic", off_topic, "Tag of the off-topic category D0");
    app->add_option("--lexicon-out", lexicon_out, "Lexicon output path")->required();
    tok.bind(app);
  }

  void run(std::ostream& out) const {
    require_input(corpus);
    require_output(lexicon_out);
    const auto config = tok.config();
    const auto categories = make_categories(cats, off_topic);
    auto in = open_text(corpus);
    const auto docs = text::read_corpus_jsonl(in, corpus);
    const auto lexicon = text::build_lexicon(docs, config);
    const auto encoded = text::encode(docs, lexicon);
    const auto cond = isa::estimate_conditional(encoded, categories);

    std::ostringstream lex;
    lexicon.save(lex);
    Outputs outputs;
    outputs.add(lexicon_out, lex.str());
    outputs.commit();
    out << "stems " << lexicon.size() << ", unique vectors " << encoded.num_unique() << ", all-zero documents "
        << encoded.zero_vector_count() << "\n";
    for (std::size_t c = 0; c < categories.size(); ++c)
      out << "  " << categories.tags()[c] << ": " << cond.training_counts[c] << " labeled documents\n";
  }
};

struct IsaEstimate {
  std::string train, test, out_path, method = "inverse", lexicon, off_topic, prior = "train", assignments_out;
  std::vector<std::string> cats;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  bool train_only_lexicon = false, ridge = false, strict_uncovered = false, on_topic_only = false;
  double ridge_lambda = 1e-8;
  TokenizerFlags tok;

  void bind(CLI::App* app) {
    app->add_option("--train", train, "Labeled training corpus (JSON lines)")->required();
    app->add_option("--test", test, "Test corpus (JSON lines)")->required();
    app->add_option("--cats", cats, "Categories, D0 first unless --off-topic")->required()->delimiter(',');
    app->add_option("--off-topic", off_topic, "Tag of the off-topic category D0");
    app->add_option("--method", method, "inverse or baseline")->check(CLI::IsMember({"inverse", "baseline"}))->capture_default_str();
    app->add_option("--bootstrap", bootstrap, "Bootstrap replicates (0 disables, otherwise >= 100)")->capture_default_str();
    seed_opt = app->add_option("--seed", seed, "Random seed (required with --bootstrap)");
    app->add_option("--out", out_path, "Result JSON path")->required();
    app->add_option("--lexicon", lexicon, "Use a saved lexicon instead of building one");
    app->add_flag("--train-only-lexicon", train_only_lexicon, "Build the lexicon from the training corpus only");
    app->add_flag("--ridge", ridge, "Allow a ridge fallback on rank deficiency");
    app->add_option("--ridge-lambda", ridge_lambda, "Ridge strength")->capture_default_str();
    app->add_flag("--strict-uncovered", strict_uncovered, "Fail when more than 5% of test mass is uncovered");
    app->add_flag("--on-topic-only", on_topic_only, "Renormalize the report over on-topic categories");
    app->add_option("--prior", prior, "Baseline prior: train or uniform")->check(CLI::IsMember({"train", "uniform"}))->capture_default_str();
    app->add_option("--assignments-out", assignments_out, "Baseline per-document categories (CSV)");
    tok.bind(app);
  }

  void run(unsigned jobs) const {
    if (bootstrap > 0 && seed_opt->count() == 0) throw UsageError("--bootstrap requires an explicit --seed");
    if (bootstrap > 0 && bootstrap < 100) throw UsageError("--bootstrap needs at least 100 replicates");
    if (!assignments_out.empty() && method != "baseline") throw UsageError("--assignments-out requires --method baseline");
    require_input(train);
    require_input(test);
    if (!lexicon.empty()) require_input(lexicon);
    require_output(out_path);
    if (!assignments_out.empty()) require_output(assignments_out);
    const auto config = tok.config();
    const auto categories = make_categories(cats, off_topic);

    auto train_in = open_text(train);
    auto test_in = open_text(test);
    const auto train_docs = text::read_corpus_jsonl(train_in, train);
    const auto test_docs = text::read_corpus_jsonl(test_in, test);

    std::optional<text::StemLexicon> lex;
    if (!lexicon.empty()) {
      auto in = open_text(lexicon);
      lex = text::StemLexicon::load(in);
    } else if (train_only_lexicon) {
      lex = text::build_lexicon(train_docs, config);
    } else {
      std::vector<text::Document> all = train_docs;
      all.insert(all.end(), test_docs.begin(), test_docs.end());
      lex = text::build_lexicon(all, config);
    }
    const auto train_enc = text::encode(train_docs, *lex);
    const auto test_enc = text::encode(test_docs, *lex);
    const auto cond = isa::estimate_conditional(train_enc, categories);

    isa::InverseOptions inverse;
    if (ridge) inverse.ridge = ridge_lambda;
    inverse.strict_uncovered = strict_uncovered;

    isa::OpinionDistribution result;
    std::optional<isa::BaselineResult> baseline;
    const std::optional<Eigen::VectorXd> prior_weights =
        prior == "train" ? std::optional<Eigen::VectorXd>(isa::training_prior(cond)) : std::nullopt;
    if (method == "inverse") {
      result = isa::estimate_inverse(cond, test_enc, inverse);
    } else {
      baseline = isa::classify_baseline(cond, prior_weights, test_enc);
      if (strict_uncovered && baseline->aggregate.diagnostics.uncovered_mass > isa::kStrictUncoveredLimit)
        throw std::runtime_error("isa: uncovered test mass exceeds the strict limit of 5%");
      result = baseline->aggregate;
    }

    std::optional<isa::BootstrapResult> ci;
    if (bootstrap > 0) {
      isa::BootstrapOptions options;
      options.replicates = bootstrap;
      options.seed = seed;
      options.method = method == "inverse" ? isa::Method::Inverse : isa::Method::Baseline;
      options.inverse = inverse;
      options.uniform_prior = prior == "uniform";
      options.jobs = jobs;
      ci = isa::bootstrap_ci(train_enc, test_enc, categories, options);
      if (on_topic_only) {
        isa::Matrix<double> reps = ci->replicates;
        isa::Matrix<double> renorm(reps.rows(), reps.cols() - 1);
        const auto d0 = static_cast<Eigen::Index>(categories.off_topic());
        for (Eigen::Index c = 0, k = 0; c < reps.cols(); ++c)
          if (c != d0) renorm.col(k++) = reps.col(c);
        for (Eigen::Index r = 0; r < renorm.rows(); ++r) {
          const double s = renorm.row(r).sum();
          if (s > 0) renorm.row(r) /= s;
        }
        ci = isa::summarize_bootstrap(std::move(renorm));
      }
    }
    if (on_topic_only) result = isa::on_topic_only(result, categories);

    Json j;
    j["method"] = method;
    Json probs = Json::object();
    for (std::size_t c = 0; c < result.categories.size(); ++c)
      probs[result.categories[c]] = num(result.probs[static_cast<Eigen::Index>(c)]);
    j["probs"] = probs;
    const auto& d = result.diagnostics;
    Json diag;
    diag["residual"] = num(d.residual);
    diag["clipped_mass"] = num(d.clipped_mass);
    diag["uncovered_mass"] = num(d.uncovered_mass);
    diag["condition"] = num(d.condition);
    diag["rank"] = d.rank;
    diag["ridged"] = d.ridged;
    diag["n_test"] = d.test_documents;
    diag["n_train_labeled"] = std::accumulate(cond.training_counts.begin(), cond.training_counts.end(), std::size_t{0});
    diag["stems"] = lex->size();
    diag["unique_vectors"] = cond.rows.size();
    diag["zero_vector_documents"] = test_enc.zero_vector_count();
    j["diagnostics"] = diag;
    if (ci) {
      Json intervals = Json::object(), sds = Json::object();
      for (std::size_t c = 0; c < result.categories.size(); ++c) {
        const auto e = static_cast<Eigen::Index>(c);
        intervals[result.categories[c]] = Json::array({num(ci->lower[e]), num(ci->upper[e])});
        sds[result.categories[c]] = num(ci->sd[e]);
      }
      j["ci"] = intervals;
      j["sd"] = sds;
      j["bootstrap"] = {{"replicates", bootstrap}, {"seed", seed}};
    }

    Outputs outputs;
    outputs.add(out_path, dump(j));
    if (baseline && !assignments_out.empty()) {
      std::ostringstream csv;
      csv << "id,category\n";
      for (std::size_t i = 0; i < test_enc.ids.size(); ++i) {
        const auto& a = baseline->assigned[i];
        csv << io::csv_escape(test_enc.ids[i]) << ',' << (a ? io::csv_escape(categories.tags()[*a]) : "") << '\n';
      }
      outputs.add(assignments_out, csv.str());
    }
    outputs.commit();
  }
};

// ---------------------------------------------------------------- swbi

std::optional<int> polarity_of(const std::string& key) {
  if (key == "-1" || key == "neg" || key == "negative") return -1;
  if (key == "0" || key == "neu" || key == "neutral") return 0;
  if (key == "1" || key == "+1" || key == "pos" || key == "positive") return 1;
  return std::nullopt;
}

struct SwbiBuild {
  std::string estimates, out_path;

  void bind(CLI::App* app) {
    app->add_option("--estimates", estimates, "Directory of <period>__<unit>__<component>.json estimate files")->required();
    app->add_option("--out", out_path, "Panel CSV path")->required();
  }

  void run() const {
    require_input_dir(estimates);
    require_output(out_path);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(estimates))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("swbi: no .json estimate files in '" + estimates + "'");

    std::map<wellbeing::CellKey, wellbeing::CellEstimate> cells;
    for (const auto& file : files) {
      const std::string where = file.string();
      Json j;
      try {
        j = Json::parse(io::read_file(file));
      } catch (const Json::parse_error& e) {
        throw std::runtime_error("swbi: " + where + ": " + e.what());
      }
      std::string period, unit, component;
      const std::string stem = file.stem().string();
      const auto a = stem.find("__"), b = stem.rfind("__");
      if (a != std::string::npos && b != a) {
        period = stem.substr(0, a);
        unit = stem.substr(a + 2, b - a - 2);
        component = stem.substr(b + 2);
      }
      if (j.contains("period")) period = j["period"].get<std::string>();
      if (j.contains("unit")) unit = j["unit"].get<std::string>();
      if (j.contains("component")) component = j["component"].get<std::string>();
      if (period.empty() || component.empty())
        throw std::runtime_error("swbi: " + where + ": cannot determine period/unit/component");
      const auto comp = wellbeing::parse_component(component);
      if (!comp) throw std::runtime_error("swbi: " + where + ": unknown component '" + component + "'");
      if (!j.contains("probs") || !j["probs"].is_object()) throw std::runtime_error("swbi: " + where + ": missing 'probs'");

      wellbeing::PolarityDistribution d;
      double mass = 0;
      for (const auto& [key, value] : j["probs"].items()) {
        const auto pol = polarity_of(key);
        if (!pol || value.is_null()) continue;
        const double p = value.get<double>();
        (*pol < 0 ? d.neg : *pol == 0 ? d.neu : d.pos) += p;
        mass += p;
      }
      if (!(mass > 0)) throw std::runtime_error("swbi: " + where + ": no -1/0/+1 probability mass");
      d.neg /= mass;
      d.neu /= mass;
      d.pos /= mass;
      std::size_t n_docs = 0;
      if (j.contains("diagnostics") && j["diagnostics"].contains("n_test")) n_docs = j["diagnostics"]["n_test"].get<std::size_t>();
      if (j.contains("n_docs")) n_docs = j["n_docs"].get<std::size_t>();
      if (!cells.emplace(wellbeing::CellKey{period, unit, *comp}, wellbeing::CellEstimate{d, n_docs}).second)
        throw std::runtime_error("swbi: " + where + ": duplicate estimate for (" + period + ", " + unit + ", " + component + ")");
    }
    const auto panel = wellbeing::build_panel(cells);
    std::ostringstream csv;
    panel.write_csv(csv);
    Outputs outputs;
    outputs.add(out_path, csv.str());
    outputs.commit();
  }
};

struct SwbiIntegrate {
  std::string panel, period = "month", column = "swbi", out_path;
  bool average = false;

  void bind(CLI::App* app) {
    app->add_option("--panel", panel, "Panel CSV")->required();
    app->add_option("--period", period, "month or year")->check(CLI::IsMember({"month", "year"}))->capture_default_str();
    app->add_option("--column", column, "Panel column to integrate")->capture_default_str();
    app->add_flag("--average", average, "Per-day means instead of sums");
    app->add_option("--out", out_path, "Output CSV (default: standard output)");
  }

  void run(std::ostream& out) const {
    require_input(panel);
    if (!out_path.empty()) require_output(out_path);
    auto in = open_text(panel);
    const auto p = wellbeing::WellBeingPanel::read_csv(in, panel);
    std::optional<wellbeing::Component> comp;
    if (column != "swbi") {
      comp = wellbeing::parse_component(column);
      if (!comp) throw UsageError("--column must be swbi or a component code, got '" + column + "'");
    }
    std::map<std::string, std::vector<std::pair<time::Instant, double>>> by_unit;
    for (const auto& row : p.rows) {
      const auto v = comp ? row.score(*comp) : row.swbi;
      if (!v) continue;
      by_unit[row.unit].emplace_back(time::parse_instant(row.period), *v);
    }
    std::ostringstream csv;
    csv << "period,unit," << column << ",count\n";
    for (auto& [unit, values] : by_unit) {
      std::sort(values.begin(), values.end());
      TimedValues tv;
      for (const auto& [t, v] : values) {
        tv.instants.push_back(t);
        tv.values.push_back(v);
      }
      const auto integrated = wellbeing::integrate_period(tv, period == "month" ? wellbeing::Period::Month : wellbeing::Period::Year,
                                                          average ? wellbeing::Aggregate::Mean : wellbeing::Aggregate::Sum);
      for (const auto& pv : integrated)
        csv << pv.period << ',' << io::csv_escape(unit) << ',' << io::format_number(pv.value) << ',' << pv.count << '\n';
    }
    if (out_path.empty()) {
      out << csv.str();
    } else {
      Outputs outputs;
      outputs.add(out_path, csv.str());
      outputs.commit();
    }
  }
};

// ---------------------------------------------------------------- leadlag

struct LeadLag {
  std::string x, y, out_path = "result.json", stamp = "end";
  double delta = 5, step = 1;

  void bind(CLI::App* app) {
    app->add_option("--x", x, "Leader candidate series (ts,value CSV)")->required();
    app->add_option("--y", y, "Lagger candidate series (ts,value CSV)")->required();
    app->add_option("--delta", delta, "Half-width of the lag grid in days")->capture_default_str();
    app->add_option("--step", step, "Lag grid spacing in days")->capture_default_str();
    app->add_option("--stamp", stamp, "ISO week labels stamped at period end or midpoint")
        ->check(CLI::IsMember({"end", "midpoint"}))
        ->capture_default_str();
    app->add_option("--out", out_path, "Result JSON path")->capture_default_str();
  }

  void run(unsigned jobs) const {
    require_input(x);
    require_input(y);
    require_output(out_path);
    const leadlag::LagGrid grid = [&] {
      try {
        return leadlag::LagGrid(delta, step);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }();
    const auto st = stamp == "end" ? time::PeriodStamp::End : time::PeriodStamp::Midpoint;
    auto xin = open_text(x);
    auto yin = open_text(y);
    const auto rx = read_timed_csv(xin, x, st);
    const auto ry = read_timed_csv(yin, y, st);
    if (rx.instants.empty() || ry.instants.empty()) throw std::runtime_error("leadlag: empty input series");
    const auto origin = std::min(rx.instants.front(), ry.instants.front());
    const auto sx = to_series(rx, origin, fs::path(x).stem().string());
    const auto sy = to_series(ry, origin, fs::path(y).stem().string());
    const auto result = leadlag::estimate_lead_lag(sx, sy, grid, jobs);

    Json j;
    j["theta_hat"] = num(result.theta_hat);
    j["correlation"] = num(result.correlation.value);
    j["out_of_range_flag"] = result.correlation.out_of_range;
    Json profile = Json::array();
    for (const auto& p : result.profile) profile.push_back({{"theta", num(p.theta)}, {"contrast", num(p.contrast)}});
    j["profile"] = profile;
    Json ties = Json::array(), excluded = Json::array();
    for (double t : result.ties) ties.push_back(num(t));
    for (double t : result.excluded) excluded.push_back(num(t));
    j["ties"] = ties;
    j["excluded_offsets"] = excluded;
    j["grid"] = {{"delta", num(delta)}, {"step", num(step)}};
    j["origin"] = time::format_instant(origin);
    j["n_x"] = sx.size();
    j["n_y"] = sy.size();
    Outputs outputs;
    outputs.add(out_path, dump(j));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- stats

stats::IndicatorMatrix load_indicators(const std::string& path) {
  auto in = open_text(path);
  return stats::read_indicators(in, path);
}

struct Cca {
  std::string x, y, out_path, scores_out;

  void bind(CLI::App* app) {
    app->add_option("--x", x, "First indicator set (CSV with a unit column)")->required();
    app->add_option("--y", y, "Second indicator set (CSV with a unit column)")->required();
    app->add_option("--out", out_path, "Result JSON path")->required();
    app->add_option("--scores-out", scores_out, "Per-unit canonical scores (CSV)");
  }

  void run() const {
    require_input(x);
    require_input(y);
    require_output(out_path);
    if (!scores_out.empty()) require_output(scores_out);
    const auto mx = load_indicators(x);
    const auto my = stats::align_units(mx, load_indicators(y));
    const auto fit = stats::cca(mx.values, my.values, mx.names, my.names);
    const auto wilks = stats::wilks_test(fit.correlations, mx.values.rows(), mx.values.cols(), my.values.cols());
    const Eigen::Index d = fit.correlations.size();

    Json j;
    j["n"] = mx.values.rows();
    Json corr = Json::array();
    for (Eigen::Index k = 0; k < d; ++k) corr.push_back(num(fit.correlations[k]));
    j["correlations"] = corr;
    auto loadings = [&](const std::vector<std::string>& names, const Eigen::MatrixXd& coef) {
      Json l = Json::object();
      for (std::size_t i = 0; i < names.size(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < d; ++k) row.push_back(num(coef(static_cast<Eigen::Index>(i), k)));
        l[names[i]] = row;
      }
      return l;
    };
    j["x_loadings"] = loadings(mx.names, fit.x_coefficients);
    j["y_loadings"] = loadings(my.names, fit.y_coefficients);
    Json w = Json::array();
    for (const auto& row : wilks)
      w.push_back({{"dimension", row.dimension}, {"lambda", num(row.lambda)}, {"statistic", num(row.statistic)},
                   {"df", row.df}, {"p_value", num(row.p_value)}, {"stars", stats::significance_stars(row.p_value)}});
    j["wilks"] = w;

    Outputs outputs;
    outputs.add(out_path, dump(j));
    if (!scores_out.empty()) {
      std::ostringstream csv;
      csv << "unit";
      for (Eigen::Index k = 0; k < d; ++k) csv << ",x" << k + 1;
      for (Eigen::Index k = 0; k < d; ++k) csv << ",y" << k + 1;
      csv << '\n';
      for (std::size_t r = 0; r < mx.units.size(); ++r) {
        csv << io::csv_escape(mx.units[r]);
        for (Eigen::Index k = 0; k < d; ++k) csv << ',' << io::format_number(fit.x_scores(static_cast<Eigen::Index>(r), k));
        for (Eigen::Index k = 0; k < d; ++k) csv << ',' << io::format_number(fit.y_scores(static_cast<Eigen::Index>(r), k));
        csv << '\n';
      }
      outputs.add(scores_out, csv.str());
    }
    outputs.commit();
  }
};

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Regress {
  std::string y, x, out_path;
  bool no_intercept = false;

  void bind(CLI::App* app) {
    app->add_option("--y", y, "Response as <csv>:<column>")->required();
    app->add_option("--x", x, "Regressors (CSV with a unit column)")->required();
    app->add_option("--out", out_path, "Result JSON path")->required();
    app->add_flag("--no-intercept", no_intercept, "Fit without an intercept");
  }

  void run() const {
    const auto colon = y.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == y.size())
      throw UsageError("--y expects <csv>:<column>, got '" + y + "'");
    const std::string y_file = y.substr(0, colon), y_col = y.substr(colon + 1);
    require_input(y_file);
    require_input(x);
    require_output(out_path);
    const auto mx = load_indicators(x);
    const auto my = stats::align_units(mx, load_indicators(y_file));
    const Eigen::VectorXd response = my.column(y_col);
    const auto fit = stats::ols(response, mx.values, !no_intercept, mx.names);

    Json j;
    j["response"] = y_col;
    Json coefs = Json::array();
    for (std::size_t k = 0; k < fit.names.size(); ++k) {
      const auto e = static_cast<Eigen::Index>(k);
      coefs.push_back({{"name", fit.names[k]}, {"estimate", num(fit.coefficients[e])}, {"std_error", num(fit.std_errors[e])},
                       {"t_value", num(fit.t_values[e])}, {"p_value", num(fit.p_values[e])}, {"stars", fit.stars[k]}});
    }
    j["coefficients"] = coefs;
    j["statistics"] = {{"n", fit.n},
                       {"r_squared", num(fit.r_squared)},
                       {"adj_r_squared", num(fit.adj_r_squared)},
                       {"sigma", num(fit.sigma)},
                       {"f_statistic", num(fit.f_stat)},
                       {"f_p_value", num(fit.f_p_value)},
                       {"df_residual", fit.df_residual},
                       {"log_likelihood", num(fit.log_lik)},
                       {"deviance", num(fit.deviance)},
                       {"aic", num(fit.aic)},
                       {"bic", num(fit.bic)}};
    // Regression-table layout: estimate with stars, standard error in
    // parentheses, then the summary rows.
    Json table = Json::array();
    for (std::size_t k = 0; k < fit.names.size(); ++k) {
      const auto e = static_cast<Eigen::Index>(k);
      table.push_back({{"row", fit.names[k]}, {"value", fixed(fit.coefficients[e], 3) + fit.stars[k]}});
      table.push_back({{"row", ""}, {"value", "(" + fixed(fit.std_errors[e], 3) + ")"}});
    }
    const auto add = [&](const char* row, std::string value) { table.push_back({{"row", row}, {"value", std::move(value)}}); };
    add("Observations", std::to_string(fit.n));
    add("R2", fixed(fit.r_squared, 3));
    add("Adjusted R2", fixed(fit.adj_r_squared, 3));
    add("Log Likelihood", fixed(fit.log_lik, 3));
    add("Residual Std. Error", fixed(fit.sigma, 3) + " (df = " + std::to_string(fit.df_residual) + ")");
    add("F Statistic", std::isfinite(fit.f_stat) ? fixed(fit.f_stat, 3) + stats::significance_stars(fit.f_p_value) : "");
    add("Deviance", fixed(fit.deviance, 3));
    add("Akaike Inf. Crit.", fixed(fit.aic, 3));
    add("Bayesian Inf. Crit.", fixed(fit.bic, 3));
    j["table"] = table;
    Outputs outputs;
    outputs.add(out_path, dump(j));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- synth

struct SynthCorpus {
  std::string spec, out_train, out_test, out_truth;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void bind(CLI::App* app) {
    app->add_option("--spec", spec, "Corpus spec JSON")->required();
    seed_opt = app->add_option("--seed", seed, "Random seed")->required();
    app->add_option("--out-train", out_train, "Training corpus (JSON lines)")->required();
    app->add_option("--out-test", out_test, "Test corpus (JSON lines)")->required();
    app->add_option("--out-truth", out_truth, "Realized mixture JSON")->required();
  }

  void run() const {
    require_input(spec);
    for (const auto* p : {&out_train, &out_test, &out_truth}) require_output(*p);
    auto s = synth::CorpusSpec::from_json(nlohmann::json::parse(io::read_file(spec)));
    s.seed = seed;
    const auto gen = synth::gen_corpus(s);
    std::ostringstream train, test;
    text::write_corpus_jsonl(train, gen.train);
    text::write_corpus_jsonl(test, gen.test);
    Json truth, mix = Json::object(), nominal = Json::object();
    for (std::size_t c = 0; c < s.categories.size(); ++c) {
      mix[s.categories[c]] = num(gen.truth[static_cast<Eigen::Index>(c)]);
      nominal[s.categories[c]] = num(s.mixture[c]);
    }
    truth["truth"] = mix;
    truth["nominal"] = nominal;
    truth["n_train"] = s.n_train;
    truth["n_test"] = s.n_test;
    truth["seed"] = seed;
    Outputs outputs;
    outputs.add(out_train, train.str());
    outputs.add(out_test, test.str());
    outputs.add(out_truth, dump(truth));
    outputs.commit();
  }
};

struct SynthSeries {
  std::string spec, out_x, out_y, out_truth;
  std::uint64_t seed = 0;

  void bind(CLI::App* app) {
    app->add_option("--spec", spec, "Series spec JSON")->required();
    app->add_option("--seed", seed, "Random seed")->required();
    app->add_option("--out-x", out_x, "x series (ts,value CSV)")->required();
    app->add_option("--out-y", out_y, "y series (ts,value CSV)")->required();
    app->add_option("--out-truth", out_truth, "Ground-truth JSON")->required();
  }

  void run() const {
    require_input(spec);
    for (const auto* p : {&out_x, &out_y, &out_truth}) require_output(*p);
    auto s = synth::SeriesSpec::from_json(nlohmann::json::parse(io::read_file(spec)));
    s.seed = seed;
    const auto pair = synth::gen_lagged_pair(s);
    std::ostringstream xs, ys;
    write_timed_csv(xs, pair.x);
    write_timed_csv(ys, pair.y);
    Json truth;
    truth["true_lag"] = num(pair.true_lag);
    truth["nominal_lag"] = num(s.lag);
    truth["x_sampling"] = s.x_sampling.to_string();
    truth["y_sampling"] = s.y_sampling.to_string();
    truth["n_x"] = pair.x.size();
    truth["n_y"] = pair.y.size();
    truth["seed"] = seed;
    Outputs outputs;
    outputs.add(out_x, xs.str());
    outputs.add(out_y, ys.str());
    outputs.add(out_truth, dump(truth));
    outputs.commit();
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Opinion-distribution estimation, well-being indices and lead-lag analysis", "socialwell"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Key=value configuration file (unknown keys are rejected)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  IsaTrain isa_train;
  IsaEstimate isa_estimate;
  SwbiBuild swbi_build;
  SwbiIntegrate swbi_integrate;
  LeadLag lead_lag;
  Cca cca;
  Regress regress;
  SynthCorpus synth_corpus;
  SynthSeries synth_series;

  auto* isa_app = app.add_subcommand("isa", "Estimate opinion distributions");
  isa_app->require_subcommand(1, 1);
  auto* isa_train_app = isa_app->add_subcommand("train", "Build and save a lexicon from a labeled corpus");
  auto* isa_estimate_app = isa_app->add_subcommand("estimate", "Estimate P(D) for a test corpus");
  auto* swbi_app = app.add_subcommand("swbi", "Well-being panel");
  swbi_app->require_subcommand(1, 1);
  auto* swbi_build_app = swbi_app->add_subcommand("build", "Assemble the panel from per-component estimates");
  auto* swbi_integrate_app = swbi_app->add_subcommand("integrate", "Per-period integrated values");
  auto* leadlag_app = app.add_subcommand("leadlag", "Hayashi-Yoshida lead-lag estimation");
  auto* cca_app = app.add_subcommand("cca", "Canonical correlation analysis with Wilks's Lambda");
  auto* regress_app = app.add_subcommand("regress", "OLS regression");
  auto* synth_app = app.add_subcommand("synth", "Synthetic fixtures with known ground truth");
  synth_app->require_subcommand(1, 1);
  auto* synth_corpus_app = synth_app->add_subcommand("corpus", "Synthetic labeled corpus");
  auto* synth_series_app = synth_app->add_subcommand("series", "Synthetic lagged series pair");

  isa_train.bind(isa_train_app);
  isa_estimate.bind(isa_estimate_app);
  swbi_build.bind(swbi_build_app);
  swbi_integrate.bind(swbi_integrate_app);
  lead_lag.bind(leadlag_app);
  cca.bind(cca_app);
  regress.bind(regress_app);
  synth_corpus.bind(synth_corpus_app);
  synth_series.bind(synth_series_app);
  for (auto* sub : {isa_app, isa_train_app, isa_estimate_app, swbi_app, swbi_build_app, swbi_integrate_app, leadlag_app,
                    cca_app, regress_app, synth_app, synth_corpus_app, synth_series_app})
    sub->fallthrough();

  std::string module = "socialwell";
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    err << "# resolved configuration\n";
    std::istringstream resolved(app.config_to_str(true, false));
    for (std::string line; std::getline(resolved, line);)
      if (!line.empty()) err << "#   " << line << '\n';

    if (isa_app->parsed()) {
      module = "isa";
      if (isa_train_app->parsed()) isa_train.run(out);
      else isa_estimate.run(jobs);
    } else if (swbi_app->parsed()) {
      module = "swbi";
      if (swbi_build_app->parsed()) swbi_build.run();
      else swbi_integrate.run(out);
    } else if (leadlag_app->parsed()) {
      module = "leadlag";
      lead_lag.run(jobs);
    } else if (cca_app->parsed()) {
      module = "cca";
      cca.run();
    } else if (regress_app->parsed()) {
      module = "regress";
      regress.run();
    } else if (synth_app->parsed()) {
      module = "synth";
      if (synth_corpus_app->parsed()) synth_corpus.run();
      else synth_series.run();
    }
  } catch (const UsageError& e) {
    err << "error: " << module << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << module << ": " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

}  // namespace socialwell::cli

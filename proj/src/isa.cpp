#include "socialwell/isa.hpp"

#include <exception>
#include <map>
#include <thread>

#include "socialwell/random.hpp"

namespace socialwell::isa {

namespace {

struct LabeledDoc {
  std::size_t vector;
  std::size_t category;
};

std::vector<LabeledDoc> labeled_documents(const text::EncodedCorpus& train, const CategorySet& cats) {
  std::vector<LabeledDoc> out;
  for (std::size_t d = 0; d < train.num_documents(); ++d) {
    const auto& label = train.labels[d];
    if (!label) continue;
    const auto c = cats.index_of(*label);
    if (!c)
      throw std::invalid_argument("isa: document '" + train.ids[d] + "' has label '" + *label +
                                  "' outside the category set");
    out.push_back({train.assignment[d], *c});
  }
  return out;
}

ConditionalStemMatrix conditional_from(const text::EncodedCorpus& train, const CategorySet& cats,
                                       const std::vector<LabeledDoc>& docs) {
  const std::size_t m = cats.size();
  std::map<std::size_t, std::vector<double>> counts;  // train vector -> per-category count
  std::vector<std::size_t> totals(m, 0);
  for (const auto& doc : docs) {
    auto& row = counts[doc.vector];
    if (row.empty()) row.assign(m, 0.0);
    row[doc.category] += 1.0;
    ++totals[doc.category];
  }
  for (std::size_t c = 0; c < m; ++c)
    if (totals[c] == 0) throw std::invalid_argument("isa: no training documents for " + cats.tags()[c]);

  ConditionalStemMatrix out;
  out.values.resize(static_cast<Eigen::Index>(counts.size()), static_cast<Eigen::Index>(m));
  out.rows.reserve(counts.size());
  Eigen::Index r = 0;
  for (const auto& [vector, row] : counts) {
    out.rows.push_back(train.unique_vectors[vector].ones);
    for (std::size_t c = 0; c < m; ++c)
      out.values(r, static_cast<Eigen::Index>(c)) = row[c] / static_cast<double>(totals[c]);
    ++r;
  }
  out.categories = cats.tags();
  out.training_counts = totals;
  return out;
}

void check_distribution(const Eigen::VectorXd& p, const char* what) {
  if ((p.array() < 0).any() || !p.allFinite()) throw std::invalid_argument(std::string("isa: ") + what + " has negative or non-finite entries");
  if (std::abs(p.sum() - 1.0) > 1e-9) throw std::invalid_argument(std::string("isa: ") + what + " does not sum to 1");
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

CategorySet::CategorySet(std::vector<std::string> tags, std::size_t off_topic)
    : tags_(std::move(tags)), off_topic_(off_topic) {
  if (tags_.size() < 2) throw std::invalid_argument("isa: a category set needs at least two categories");
  if (off_topic_ >= tags_.size()) throw std::invalid_argument("isa: off-topic index out of range");
  for (std::size_t i = 0; i < tags_.size(); ++i)
    for (std::size_t j = i + 1; j < tags_.size(); ++j)
      if (tags_[i] == tags_[j]) throw std::invalid_argument("isa: duplicate category '" + tags_[i] + "'");
}

std::optional<std::size_t> CategorySet::index_of(const std::string& tag) const {
  auto it = std::find(tags_.begin(), tags_.end(), tag);
  if (it == tags_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - tags_.begin());
}

std::optional<std::size_t> ConditionalStemMatrix::row_of(const std::vector<std::uint32_t>& key) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), key);
  if (it == rows.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - rows.begin());
}

std::string to_string(Method m) { return m == Method::Inverse ? "inverse" : "baseline"; }

ConditionalStemMatrix estimate_conditional(const text::EncodedCorpus& train, const CategorySet& cats) {
  return conditional_from(train, cats, labeled_documents(train, cats));
}

TestDistribution test_distribution(const ConditionalStemMatrix& cond, const text::EncodedCorpus& test) {
  if (test.num_documents() == 0) throw std::invalid_argument("isa: empty test corpus");
  TestDistribution out;
  out.probs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cond.rows.size()));
  double covered = 0, uncovered = 0;
  for (const auto& v : test.unique_vectors) {
    const auto mass = static_cast<double>(v.multiplicity);
    if (auto r = cond.row_of(v.ones)) {
      out.probs[static_cast<Eigen::Index>(*r)] += mass;
      covered += mass;
    } else {
      uncovered += mass;
    }
  }
  const double total = covered + uncovered;
  out.uncovered_mass = uncovered / total;
  out.documents = test.num_documents();
  if (covered == 0) throw std::runtime_error("isa: no test document shares a stem vector with the training set");
  out.probs /= covered;
  return out;
}

OpinionDistribution estimate_inverse(const ConditionalStemMatrix& cond, const Eigen::VectorXd& test_vector_dist,
                                     const InverseOptions& options) {
  if (test_vector_dist.size() != cond.values.rows())
    throw std::invalid_argument("isa: P(S) length does not match the conditional matrix");
  check_distribution(test_vector_dist, "P(S)");
  const auto ls = solve_least_squares(cond.values, test_vector_dist, options.ridge);

  OpinionDistribution out;
  out.categories = cond.categories;
  out.method = Method::Inverse;
  out.probs = project_to_simplex(ls.coefficients);
  auto& diag = out.diagnostics;
  diag.unconstrained = ls.coefficients;
  diag.clipped_mass = (out.probs - ls.coefficients).lpNorm<1>();
  diag.residual = (cond.values * out.probs - test_vector_dist).norm();
  diag.condition = ls.condition;
  diag.rank = ls.rank;
  diag.ridged = ls.ridged;
  return out;
}

OpinionDistribution estimate_inverse(const ConditionalStemMatrix& cond, const text::EncodedCorpus& test,
                                     const InverseOptions& options) {
  const auto ps = test_distribution(cond, test);
  if (options.strict_uncovered && ps.uncovered_mass > kStrictUncoveredLimit)
    throw std::runtime_error("isa: uncovered test mass " + std::to_string(ps.uncovered_mass) +
                             " exceeds the strict limit of 5%");
  auto out = estimate_inverse(cond, ps.probs, options);
  out.diagnostics.uncovered_mass = ps.uncovered_mass;
  out.diagnostics.test_documents = ps.documents;
  return out;
}

Eigen::VectorXd training_prior(const ConditionalStemMatrix& cond) {
  Eigen::VectorXd prior(static_cast<Eigen::Index>(cond.training_counts.size()));
  for (std::size_t c = 0; c < cond.training_counts.size(); ++c)
    prior[static_cast<Eigen::Index>(c)] = static_cast<double>(cond.training_counts[c]);
  return prior / prior.sum();
}

BaselineResult classify_baseline(const ConditionalStemMatrix& cond, const std::optional<Eigen::VectorXd>& prior,
                                 const text::EncodedCorpus& test) {
  const Eigen::Index m = cond.values.cols();
  Eigen::VectorXd weights = prior ? *prior : Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  if (weights.size() != m) throw std::invalid_argument("isa: prior length does not match the category count");
  check_distribution(weights, "prior");

  std::vector<std::optional<std::size_t>> per_vector(test.num_unique());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
  double uncovered = 0;
  for (std::size_t u = 0; u < test.num_unique(); ++u) {
    const auto& v = test.unique_vectors[u];
    const auto r = cond.row_of(v.ones);
    if (!r) {
      uncovered += static_cast<double>(v.multiplicity);
      continue;
    }
    Eigen::Index best = 0;
    double best_score = cond.values(static_cast<Eigen::Index>(*r), 0) * weights[0];
    for (Eigen::Index c = 1; c < m; ++c) {
      const double score = cond.values(static_cast<Eigen::Index>(*r), c) * weights[c];
      if (score > best_score) {
        best = c;
        best_score = score;
      }
    }
    per_vector[u] = static_cast<std::size_t>(best);
    counts[best] += static_cast<double>(v.multiplicity);
  }
  const double covered = counts.sum();
  if (covered == 0) throw std::runtime_error("isa: no test document shares a stem vector with the training set");

  BaselineResult out;
  out.assigned.reserve(test.num_documents());
  for (auto idx : test.assignment) out.assigned.push_back(per_vector[idx]);
  out.aggregate.categories = cond.categories;
  out.aggregate.method = Method::Baseline;
  out.aggregate.probs = counts / covered;
  out.aggregate.diagnostics.uncovered_mass = uncovered / (covered + uncovered);
  out.aggregate.diagnostics.test_documents = test.num_documents();
  return out;
}

OpinionDistribution on_topic_only(const OpinionDistribution& dist, const CategorySet& cats) {
  if (dist.categories != cats.tags()) throw std::invalid_argument("isa: distribution categories do not match");
  OpinionDistribution out = dist;
  const auto d0 = static_cast<Eigen::Index>(cats.off_topic());
  const Eigen::Index m = dist.probs.size();
  out.probs.resize(m - 1);
  out.categories.clear();
  for (Eigen::Index c = 0, k = 0; c < m; ++c) {
    if (c == d0) continue;
    out.probs[k++] = dist.probs[c];
    out.categories.push_back(dist.categories[static_cast<std::size_t>(c)]);
  }
  const double mass = out.probs.sum();
  if (mass <= 0) throw std::runtime_error("isa: no on-topic mass to renormalize");
  out.probs /= mass;
  return out;
}

BootstrapResult bootstrap_ci(const text::EncodedCorpus& train, const text::EncodedCorpus& test,
                             const CategorySet& cats, const BootstrapOptions& options) {
  if (options.replicates < 100) throw std::invalid_argument("isa: bootstrap needs at least 100 replicates");
  if (!(train.lexicon == test.lexicon))
    throw std::invalid_argument("isa: train and test corpora were encoded with different lexicons");
  const auto docs = labeled_documents(train, cats);
  if (docs.empty()) throw std::invalid_argument("isa: training corpus has no labeled documents");
  const std::size_t m = cats.size();
  const std::size_t b = options.replicates;

  Matrix<double> draws(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(m));

  auto replicate = [&](std::size_t r) {
    random::Xoshiro256 rng(random::substream_seed(options.seed, r));
    std::vector<LabeledDoc> sample(docs.size());
    std::vector<std::size_t> per_category(m);
    std::size_t attempt = 0;
    for (;; ++attempt) {
      if (attempt > options.max_redraws)
        throw std::runtime_error("isa: bootstrap replicate " + std::to_string(r) +
                                 " kept losing a category after " + std::to_string(options.max_redraws) + " redraws");
      std::fill(per_category.begin(), per_category.end(), 0);
      for (auto& s : sample) {
        s = docs[rng.below(docs.size())];
        ++per_category[s.category];
      }
      if (std::find(per_category.begin(), per_category.end(), 0) == per_category.end()) break;
    }
    const auto cond = conditional_from(train, cats, sample);
    Eigen::VectorXd probs;
    if (options.method == Method::Inverse) {
      probs = estimate_inverse(cond, test, options.inverse).probs;
    } else {
      std::optional<Eigen::VectorXd> prior;
      if (!options.uniform_prior) prior = training_prior(cond);
      probs = classify_baseline(cond, prior, test).aggregate.probs;
    }
    draws.row(static_cast<Eigen::Index>(r)) = probs.transpose();
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(b)));
  if (jobs == 1) {
    for (std::size_t r = 0; r < b; ++r) replicate(r);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < jobs; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t r = t; r < b; r += jobs) replicate(r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  return summarize_bootstrap(std::move(draws));
}

BootstrapResult summarize_bootstrap(Matrix<double> replicates) {
  const Eigen::Index b = replicates.rows(), m = replicates.cols();
  if (b < 2) throw std::invalid_argument("isa: need at least two bootstrap replicates");
  BootstrapResult out;
  out.lower.resize(m);
  out.upper.resize(m);
  out.sd.resize(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    std::vector<double> column(replicates.col(c).data(), replicates.col(c).data() + b);
    out.lower[c] = percentile(column, 0.025);
    out.upper[c] = percentile(column, 0.975);
    const double mean = replicates.col(c).mean();
    out.sd[c] = std::sqrt((replicates.col(c).array() - mean).square().sum() / static_cast<double>(b - 1));
  }
  out.replicates = std::move(replicates);
  return out;
}

}  // namespace socialwell::isa

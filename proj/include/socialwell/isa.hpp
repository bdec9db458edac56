#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socialwell/textproc.hpp"

namespace socialwell::isa {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Euclidean projection onto the probability simplex {p >= 0, sum p = 1}
/// (sort-and-threshold algorithm of Held, Wolfe and Crowder / Duchi et al.).
template <typename Derived>
Vector<typename Derived::Scalar> project_to_simplex(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = v.size();
  if (n == 0) throw std::invalid_argument("isa: cannot project an empty vector");
  Vector<Scalar> sorted = v;
  std::sort(sorted.data(), sorted.data() + n, [](Scalar a, Scalar b) { return a > b; });
  Scalar cumulative(0), tau(0);
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const Scalar candidate = (cumulative - Scalar(1)) / Scalar(j + 1);
    if (sorted[j] - candidate > Scalar(0)) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(Scalar(0)).matrix();
}

template <typename Scalar>
struct LeastSquaresSolution {
  Vector<Scalar> coefficients;
  Eigen::Index rank = 0;
  Scalar condition = Scalar(0);  // ratio of extreme singular values of the design
  bool ridged = false;
};

/// Minimizes ||design * p - target||_2 with a column-pivoting QR. A design
/// of deficient rank throws unless `ridge` is given, in which case the
/// augmented system [design; sqrt(ridge) I] is solved instead.
template <typename DerivedA, typename DerivedB>
LeastSquaresSolution<typename DerivedA::Scalar> solve_least_squares(const Eigen::MatrixBase<DerivedA>& design,
                                                                    const Eigen::MatrixBase<DerivedB>& target,
                                                                    std::optional<typename DerivedA::Scalar> ridge = {}) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index k = design.rows(), m = design.cols();
  if (target.size() != k) throw std::invalid_argument("isa: target length does not match design rows");
  if (k < m) throw std::invalid_argument("isa: fewer unique stem vectors than categories (K < M)");

  LeastSquaresSolution<Scalar> out;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(design);
  const auto& sv = svd.singularValues();
  out.condition = sv[m - 1] > Scalar(0) ? sv[0] / sv[m - 1] : std::numeric_limits<Scalar>::infinity();

  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(design);
  out.rank = qr.rank();
  if (out.rank == m) {
    out.coefficients = qr.solve(target.derived().template cast<Scalar>().eval());
    return out;
  }
  if (!ridge) throw std::runtime_error("isa: conditional matrix rank-deficient");
  Matrix<Scalar> augmented(k + m, m);
  augmented << design, std::sqrt(*ridge) * Matrix<Scalar>::Identity(m, m);
  Vector<Scalar> rhs = Vector<Scalar>::Zero(k + m);
  rhs.head(k) = target;
  out.coefficients = augmented.colPivHouseholderQr().solve(rhs);
  out.ridged = true;
  return out;
}

/// Ordered categories D0..DM; D0 is the off-topic (noise) category.
class CategorySet {
 public:
  explicit CategorySet(std::vector<std::string> tags, std::size_t off_topic = 0);

  const std::vector<std::string>& tags() const { return tags_; }
  std::size_t size() const { return tags_.size(); }
  std::size_t off_topic() const { return off_topic_; }
  std::optional<std::size_t> index_of(const std::string& tag) const;

 private:
  std::vector<std::string> tags_;
  std::size_t off_topic_;
};

/// P(S|D): one row per unique stem vector seen among labeled training
/// documents, one column per category. Columns sum to one.
struct ConditionalStemMatrix {
  Eigen::MatrixXd values;
  std::vector<std::vector<std::uint32_t>> rows;  // stem-vector keys
  std::vector<std::string> categories;
  std::vector<std::size_t> training_counts;  // labeled documents per category

  std::optional<std::size_t> row_of(const std::vector<std::uint32_t>& key) const;
};

enum class Method { Baseline, Inverse };

std::string to_string(Method m);

struct Diagnostics {
  double residual = 0;        // ||P(S|D) p - P(S)||_2 at the returned p
  double condition = 0;       // condition number of P(S|D)
  double clipped_mass = 0;    // L1 mass moved by the simplex projection
  double uncovered_mass = 0;  // test mass on vectors without a P(S|D) row
  Eigen::Index rank = 0;
  bool ridged = false;
  Eigen::VectorXd unconstrained;  // least-squares solution before projection
  std::size_t test_documents = 0;
};

struct OpinionDistribution {
  Eigen::VectorXd probs;
  std::vector<std::string> categories;
  Method method = Method::Inverse;
  Diagnostics diagnostics;
};

struct InverseOptions {
  std::optional<double> ridge;  // unset: rank deficiency is an error
  bool strict_uncovered = false;  // error when uncovered mass exceeds 5%
};

inline constexpr double kStrictUncoveredLimit = 0.05;

/// Column c is the normalized histogram of stem vectors among training
/// documents labeled c. Unlabeled documents are ignored; labels outside
/// `cats` are an error.
ConditionalStemMatrix estimate_conditional(const text::EncodedCorpus& train, const CategorySet& cats);

/// P(S) of `test` over the rows of `cond`, renormalized over covered rows.
struct TestDistribution {
  Eigen::VectorXd probs;
  double uncovered_mass = 0;
  std::size_t documents = 0;
};

TestDistribution test_distribution(const ConditionalStemMatrix& cond, const text::EncodedCorpus& test);

/// Least-squares inversion of P(S) = P(S|D) P(D), projected onto the simplex.
OpinionDistribution estimate_inverse(const ConditionalStemMatrix& cond, const Eigen::VectorXd& test_vector_dist,
                                     const InverseOptions& options = {});

OpinionDistribution estimate_inverse(const ConditionalStemMatrix& cond, const text::EncodedCorpus& test,
                                     const InverseOptions& options = {});

struct BaselineResult {
  /// Per test document (input order); empty for documents whose vector has
  /// no P(S|D) row.
  std::vector<std::optional<std::size_t>> assigned;
  OpinionDistribution aggregate;
};

/// Assigns each document argmax_D P(s|D) prior(D), lowest index on ties, and
/// aggregates. An empty prior means uniform.
BaselineResult classify_baseline(const ConditionalStemMatrix& cond, const std::optional<Eigen::VectorXd>& prior,
                                 const text::EncodedCorpus& test);

/// Category frequencies among the labeled training documents.
Eigen::VectorXd training_prior(const ConditionalStemMatrix& cond);

/// Renormalizes over every category except D0.
OpinionDistribution on_topic_only(const OpinionDistribution& dist, const CategorySet& cats);

struct BootstrapOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  Method method = Method::Inverse;
  InverseOptions inverse;
  bool uniform_prior = false;  // baseline only; default is the replicate's label frequencies
  std::size_t max_redraws = 100;  // per replicate
  unsigned jobs = 1;
};

struct BootstrapResult {
  Eigen::VectorXd lower;  // 2.5% percentile
  Eigen::VectorXd upper;  // 97.5% percentile
  Eigen::VectorXd sd;
  Matrix<double> replicates;  // replicates x categories
};

/// Percentile intervals and standard deviations of bootstrap replicates
/// (rows), e.g. after renormalizing them.
BootstrapResult summarize_bootstrap(Matrix<double> replicates);

/// Percentile bootstrap over training documents. Replicate r draws from
/// substream r of `seed`, so results do not depend on `jobs`.
BootstrapResult bootstrap_ci(const text::EncodedCorpus& train, const text::EncodedCorpus& test,
                             const CategorySet& cats, const BootstrapOptions& options);

}  // namespace socialwell::isa

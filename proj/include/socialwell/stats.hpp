#pragma once

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socialwell/distributions.hpp"

namespace socialwell::stats {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Observation units by named indicators, no missing entries.
struct IndicatorMatrix {
  std::vector<std::string> units;
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // units x names

  void validate() const;
  Eigen::VectorXd column(const std::string& name) const;
};

/// CSV with a `unit` key column and named numeric columns. Empty or
/// non-numeric cells are rejected with the row named.
IndicatorMatrix read_indicators(std::istream& in, const std::string& source);

/// Reorders `y` to the unit order of `x`; the unit sets must match.
IndicatorMatrix align_units(const IndicatorMatrix& x, const IndicatorMatrix& y);

std::string significance_stars(double p);

namespace detail {

inline std::string name_of(const std::vector<std::string>& names, Eigen::Index i) {
  if (static_cast<std::size_t>(i) < names.size()) return names[static_cast<std::size_t>(i)];
  return "column " + std::to_string(i);
}

/// Columns a column-pivoting QR placed beyond the numerical rank.
template <typename QR>
std::string aliased_columns(const QR& qr, const std::vector<std::string>& names) {
  std::string out;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = qr.rank(); k < perm.size(); ++k)
    out += (out.empty() ? "" : ", ") + name_of(names, perm[k]);
  return out;
}

}  // namespace detail

template <typename Scalar>
struct OlsResult {
  std::vector<std::string> names;  // "(Intercept)" first when fitted
  Vector<Scalar> coefficients;
  Vector<Scalar> std_errors;
  Vector<Scalar> t_values;
  Vector<Scalar> p_values;
  std::vector<std::string> stars;
  Scalar r_squared{}, adj_r_squared{}, sigma{};
  Scalar f_stat{}, f_p_value{};  // NaN for intercept-only fits
  Scalar log_lik{}, deviance{}, aic{}, bic{};
  Eigen::Index n = 0;
  Eigen::Index df_residual = 0;
  Eigen::Index n_params = 0;  // coefficients + error variance, as counted by AIC/BIC
};

/// Least squares via column-pivoting QR with the usual regression summary.
/// Log-likelihood assumes normal errors with the ML variance RSS / n.
template <typename DerivedY, typename DerivedX>
OlsResult<typename DerivedY::Scalar> ols(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedX>& x,
                                         bool intercept, const std::vector<std::string>& names = {}) {
  using Scalar = typename DerivedY::Scalar;
  const Eigen::Index n = y.size();
  if (x.rows() != n) throw std::invalid_argument("stats: response and design differ in rows");
  const Eigen::Index p = x.cols() + (intercept ? 1 : 0);
  if (p == 0) throw std::invalid_argument("stats: empty model");
  if (n <= p) throw std::invalid_argument("stats: need more observations than coefficients");

  OlsResult<Scalar> out;
  Matrix<Scalar> design(n, p);
  if (intercept) {
    design.col(0).setOnes();
    out.names.push_back("(Intercept)");
  }
  design.rightCols(x.cols()) = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.names.push_back(detail::name_of(names, j));

  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(design);
  if (qr.rank() < p) throw std::invalid_argument("stats: rank-deficient design, aliased columns: " +
                                                 detail::aliased_columns(qr, out.names));
  out.coefficients = qr.solve(y.derived().eval());
  const Vector<Scalar> residuals = y - design * out.coefficients;
  const Scalar rss = residuals.squaredNorm();
  out.n = n;
  out.df_residual = n - p;
  out.n_params = p + 1;
  const auto df = static_cast<Scalar>(out.df_residual);
  out.sigma = std::sqrt(rss / df);
  out.deviance = rss;

  // (X'X)^-1 = P R^-1 R^-T P'
  const auto r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  Matrix<Scalar> r_inv = r.solve(Matrix<Scalar>::Identity(p, p));
  const Vector<Scalar> perm_diag = r_inv.rowwise().squaredNorm();
  out.std_errors.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) out.std_errors[qr.colsPermutation().indices()[k]] = out.sigma * std::sqrt(perm_diag[k]);
  out.t_values = out.coefficients.cwiseQuotient(out.std_errors);
  out.p_values.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    out.p_values[k] = static_cast<Scalar>(dist::student_t_two_sided(static_cast<double>(out.t_values[k]), static_cast<double>(df)));
    out.stars.push_back(significance_stars(static_cast<double>(out.p_values[k])));
  }

  const Scalar tss = intercept ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  const Eigen::Index df_model = p - (intercept ? 1 : 0);
  if (df_model == 0 || tss == Scalar(0)) {
    out.r_squared = Scalar(0);
  } else {
    out.r_squared = std::clamp(Scalar(1) - rss / tss, Scalar(0), Scalar(1));
  }
  const Scalar n_eff = static_cast<Scalar>(intercept ? n - 1 : n);
  out.adj_r_squared = Scalar(1) - (Scalar(1) - out.r_squared) * n_eff / df;
  if (df_model == 0) {
    out.f_stat = out.f_p_value = std::numeric_limits<Scalar>::quiet_NaN();
  } else {
    out.f_stat = ((tss - rss) / static_cast<Scalar>(df_model)) / (rss / df);
    out.f_p_value = static_cast<Scalar>(dist::f_upper(static_cast<double>(out.f_stat), static_cast<double>(df_model), static_cast<double>(df)));
  }
  const auto nn = static_cast<Scalar>(n);
  out.log_lik = -nn / 2 * (std::log(2 * std::numbers::pi_v<Scalar>) + std::log(rss / nn) + 1);
  out.aic = -2 * out.log_lik + 2 * static_cast<Scalar>(out.n_params);
  out.bic = -2 * out.log_lik + std::log(nn) * static_cast<Scalar>(out.n_params);
  return out;
}

template <typename Scalar>
struct CcaResult {
  Matrix<Scalar> x_coefficients;  // px x d, on standardized variables
  Matrix<Scalar> y_coefficients;  // py x d
  Matrix<Scalar> x_scores;        // n x d, unit sample variance
  Matrix<Scalar> y_scores;
  Vector<Scalar> correlations;    // nonincreasing, in [0, 1]
};

/// Centers and scales each column to unit sample variance; a constant
/// column is an error naming it.
template <typename Derived>
Matrix<typename Derived::Scalar> standardize(const Eigen::MatrixBase<Derived>& m, const std::vector<std::string>& names = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = m.rows();
  if (n < 2) throw std::invalid_argument("stats: need at least two observations");
  Matrix<Scalar> out = m.rowwise() - m.colwise().mean();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const Scalar sd = std::sqrt(out.col(j).squaredNorm() / static_cast<Scalar>(n - 1));
    if (!(sd > Scalar(0))) throw std::invalid_argument("stats: constant column " + detail::name_of(names, j));
    out.col(j) /= sd;
  }
  return out;
}

/// Canonical correlation analysis on standardized variables: QR of each
/// side, then the SVD of Qx' Qy. Axis k's largest-magnitude x coefficient
/// is made positive.
template <typename DerivedX, typename DerivedY>
CcaResult<typename DerivedX::Scalar> cca(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                                         const std::vector<std::string>& x_names = {},
                                         const std::vector<std::string>& y_names = {}) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = x.rows(), px = x.cols(), py = y.cols();
  if (y.rows() != n) throw std::invalid_argument("stats: x and y differ in rows");
  if (px == 0 || py == 0) throw std::invalid_argument("stats: empty indicator set");
  if (n <= std::max(px, py)) throw std::invalid_argument("stats: need more observations than variables on each side");

  const Matrix<Scalar> xs = standardize(x, x_names), ys = standardize(y, y_names);
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qx(xs), qy(ys);
  if (qx.rank() < px) throw std::invalid_argument("stats: x is rank-deficient, collinear columns: " + detail::aliased_columns(qx, x_names));
  if (qy.rank() < py) throw std::invalid_argument("stats: y is rank-deficient, collinear columns: " + detail::aliased_columns(qy, y_names));

  const Matrix<Scalar> q_x = qx.householderQ() * Matrix<Scalar>::Identity(n, px);
  const Matrix<Scalar> q_y = qy.householderQ() * Matrix<Scalar>::Identity(n, py);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(q_x.transpose() * q_y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index d = std::min(px, py);
  const Scalar scale = std::sqrt(static_cast<Scalar>(n - 1));

  auto coefficients = [&](const auto& qr, const Matrix<Scalar>& singular_vectors, Eigen::Index p) {
    const auto r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    Matrix<Scalar> permuted = r.solve(singular_vectors.leftCols(d)) * scale;
    Matrix<Scalar> coef(p, d);
    for (Eigen::Index k = 0; k < p; ++k) coef.row(qr.colsPermutation().indices()[k]) = permuted.row(k);
    return coef;
  };

  CcaResult<Scalar> out;
  out.x_coefficients = coefficients(qx, svd.matrixU(), px);
  out.y_coefficients = coefficients(qy, svd.matrixV(), py);
  out.correlations = svd.singularValues().head(d).cwiseMin(Scalar(1)).cwiseMax(Scalar(0));
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::Index arg = 0;
    out.x_coefficients.col(k).cwiseAbs().maxCoeff(&arg);
    if (out.x_coefficients(arg, k) < Scalar(0)) {
      out.x_coefficients.col(k) *= Scalar(-1);
      out.y_coefficients.col(k) *= Scalar(-1);
    }
  }
  out.x_scores = xs * out.x_coefficients;
  out.y_scores = ys * out.y_coefficients;
  return out;
}

template <typename Scalar>
struct WilksRow {
  Eigen::Index dimension = 0;  // 1-based
  Scalar lambda{};
  Scalar statistic{};  // Bartlett chi-square
  Eigen::Index df = 0;
  Scalar p_value{};
};

/// Lambda_k = prod_{i>=k} (1 - r_i^2), tested with Bartlett's approximation
/// -(n - 1 - (px + py + 1) / 2) ln Lambda_k on (px - k + 1)(py - k + 1) df.
template <typename Derived>
std::vector<WilksRow<typename Derived::Scalar>> wilks_test(const Eigen::MatrixBase<Derived>& correlations, Eigen::Index n,
                                                           Eigen::Index px, Eigen::Index py) {
  using Scalar = typename Derived::Scalar;
  std::vector<WilksRow<Scalar>> rows;
  const Eigen::Index d = correlations.size();
  const Scalar factor = static_cast<Scalar>(n) - Scalar(1) - static_cast<Scalar>(px + py + 1) / Scalar(2);
  for (Eigen::Index k = 0; k < d; ++k) {
    WilksRow<Scalar> row;
    row.dimension = k + 1;
    row.lambda = Scalar(1);
    for (Eigen::Index i = k; i < d; ++i) row.lambda *= Scalar(1) - correlations(i) * correlations(i);
    row.lambda = std::max(row.lambda, Scalar(0));
    row.df = (px - k) * (py - k);
    if (row.lambda == Scalar(0)) {
      row.statistic = std::numeric_limits<Scalar>::infinity();
      row.p_value = Scalar(0);
    } else {
      row.statistic = row.lambda == Scalar(1) ? Scalar(0) : -factor * std::log(row.lambda);
      row.p_value = row.df > 0 ? static_cast<Scalar>(dist::chi_squared_upper(static_cast<double>(row.statistic),
                                                                          static_cast<double>(row.df)))
                               : std::numeric_limits<Scalar>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace socialwell::stats

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "socialwell/series.hpp"

namespace socialwell::leadlag {

/// Hayashi-Yoshida covariance: sum of dX_i dY_j over all pairs of
/// observation intervals (t_{i-1}, t_i] and (s_{j-1}, s_j] that intersect.
/// Linear-time sweep; each series' intervals tile its observation window,
/// so the intersecting pairs form a monotone staircase.
template <typename TX, typename VX, typename TY, typename VY>
typename VX::Scalar hy_covariance(const Eigen::MatrixBase<TX>& tx, const Eigen::MatrixBase<VX>& x,
                                  const Eigen::MatrixBase<TY>& ty, const Eigen::MatrixBase<VY>& y) {
  using Scalar = typename VX::Scalar;
  const Eigen::Index n = tx.size(), m = ty.size();
  Scalar sum(0);
  bool overlap = false;
  Eigen::Index i = 1, j = 1;
  while (i < n && j < m) {
    if (tx(i - 1) < ty(j) && ty(j - 1) < tx(i)) {
      sum += (x(i) - x(i - 1)) * (y(j) - y(j - 1));
      overlap = true;
    }
    if (tx(i) < ty(j)) {
      ++i;
    } else if (ty(j) < tx(i)) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  if (!overlap) throw std::invalid_argument("leadlag: no interval overlap");
  return sum;
}

namespace reference {

/// O(n m) double loop over every interval pair; kept as a test oracle.
template <typename TX, typename VX, typename TY, typename VY>
typename VX::Scalar hy_covariance(const Eigen::MatrixBase<TX>& tx, const Eigen::MatrixBase<VX>& x,
                                  const Eigen::MatrixBase<TY>& ty, const Eigen::MatrixBase<VY>& y) {
  using Scalar = typename VX::Scalar;
  Scalar sum(0);
  bool overlap = false;
  for (Eigen::Index i = 1; i < tx.size(); ++i)
    for (Eigen::Index j = 1; j < ty.size(); ++j)
      if (tx(i - 1) < ty(j) && ty(j - 1) < tx(i)) {
        sum += (x(i) - x(i - 1)) * (y(j) - y(j - 1));
        overlap = true;
      }
  if (!overlap) throw std::invalid_argument("leadlag: no interval overlap");
  return sum;
}

}  // namespace reference

/// Sum of squared consecutive increments.
template <typename Derived>
typename Derived::Scalar realized_variance(const Eigen::MatrixBase<Derived>& values) {
  const Eigen::Index n = values.size();
  if (n < 2) return typename Derived::Scalar(0);
  return (values.tail(n - 1) - values.head(n - 1)).squaredNorm();
}

double hy_covariance(const AsyncSeries& x, const AsyncSeries& y);

struct Correlation {
  double value = 0;
  bool out_of_range = false;  // |value| > 1, a finite-sample artifact
};

/// HY covariance over the square root of the full-sample realized variances.
Correlation hy_correlation(const AsyncSeries& x, const AsyncSeries& y);

/// Translates times by -theta: the result at time t carries y(t + theta).
AsyncSeries shift(const AsyncSeries& y, double theta);

/// Symmetric offsets {-k step, ..., 0, ..., k step}, k = floor(delta / step).
class LagGrid {
 public:
  LagGrid(double delta, double step);

  double delta() const { return delta_; }
  double step() const { return step_; }
  const std::vector<double>& offsets() const { return offsets_; }

 private:
  double delta_;
  double step_;
  std::vector<double> offsets_;
};

struct ContrastPoint {
  double theta;
  double contrast;
};

struct LeadLagResult {
  double theta_hat = 0;
  std::vector<ContrastPoint> profile;  // grid order, evaluated offsets only
  Correlation correlation;             // at theta_hat
  std::vector<double> ties;            // offsets attaining max |U|
  std::vector<double> excluded;        // offsets with no interval overlap
};

/// Relative tolerance under which two |U| values count as tied.
inline constexpr double kTieTolerance = 1e-9;

/// U(theta) = HY covariance of x against y shifted by theta; theta_hat
/// maximizes |U|. Positive theta_hat means x leads y. Ties go to the
/// smallest |theta|, then to the negative offset.
LeadLagResult estimate_lead_lag(const AsyncSeries& x, const AsyncSeries& y, const LagGrid& grid,
                                unsigned jobs = 1);

/// Realized correlation after previous-tick synchronization of both series
/// onto a regular grid of spacing `step` across their common window.
double previous_tick_correlation(const AsyncSeries& x, const AsyncSeries& y, double step);

}  // namespace socialwell::leadlag

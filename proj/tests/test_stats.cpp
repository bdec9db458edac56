#include <doctest.h>

#include <random>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "oracles.hpp"
#include "socialwell/distributions.hpp"
#include "socialwell/stats.hpp"

using namespace socialwell;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd gaussian(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> z;
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(gen);
  return m;
}

double corr(const VectorXd& a, const VectorXd& b) {
  const VectorXd ac = a.array() - a.mean(), bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

}  // namespace

TEST_CASE("distribution tails agree with boost") {
  for (double df : {1.0, 2.5, 7.0, 30.0, 120.0})
    for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0}) {
      const double expect = boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
      CHECK(dist::chi_squared_upper(x, df) == doctest::Approx(expect).epsilon(1e-10));
      const double t_expect = 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), x));
      CHECK(dist::student_t_two_sided(x, df) == doctest::Approx(t_expect).epsilon(1e-10));
      CHECK(dist::student_t_two_sided(-x, df) == doctest::Approx(t_expect).epsilon(1e-10));
      for (double d2 : {3.0, 27.0}) {
        const double f_expect = boost::math::cdf(boost::math::complement(boost::math::fisher_f(df, d2), x));
        CHECK(dist::f_upper(x, df, d2) == doctest::Approx(f_expect).epsilon(1e-10));
      }
    }
  CHECK(dist::gamma_q(3.0, 2.0) == doctest::Approx(boost::math::gamma_q(3.0, 2.0)).epsilon(1e-12));
  CHECK(dist::beta_inc(2.0, 5.0, 0.3) == doctest::Approx(boost::math::ibeta(2.0, 5.0, 0.3)).epsilon(1e-12));
  CHECK(dist::chi_squared_upper(0, 3) == 1);
}

TEST_CASE("significance stars") {
  CHECK(stats::significance_stars(0.0005) == "***");
  CHECK(stats::significance_stars(0.001) == "***");
  CHECK(stats::significance_stars(0.005) == "**");
  CHECK(stats::significance_stars(0.05) == "*");
  CHECK(stats::significance_stars(0.0501) == "");
  CHECK(stats::significance_stars(std::nan("")) == "");
}

TEST_CASE("ols examples") {
  VectorXd x = VectorXd::LinSpaced(10, 1, 10);
  VectorXd y = 2 * x;
  auto fit = stats::ols(y, MatrixXd(x), true, {"x"});
  CHECK(std::abs(fit.coefficients[1] - 2.0) < 1e-12);
  CHECK(std::abs(fit.r_squared - 1.0) < 1e-12);
  CHECK(fit.names == std::vector<std::string>{"(Intercept)", "x"});

  VectorXd c = VectorXd::Constant(8, 3.5);
  auto flat = stats::ols(c, MatrixXd(8, 0), true);
  CHECK(std::abs(flat.coefficients[0] - 3.5) < 1e-12);
  CHECK(flat.r_squared == 0);
  CHECK(std::isnan(flat.f_stat));
}

TEST_CASE("ols matches the normal-equations oracle") {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(gen() % 12);
    const MatrixXd x = gaussian(gen, 40, p);
    const VectorXd y = x * gaussian(gen, p, 1) + gaussian(gen, 40, 1) + VectorXd::Constant(40, 1.5);
    const auto fit = stats::ols(y, x, true);
    const auto o = oracle::ols_normal_equations(y, x, true);
    CHECK((fit.coefficients - o.beta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(fit.r_squared - o.r_squared) < 1e-10);
    CHECK(std::abs(fit.f_stat - o.f_stat) < 1e-10 * std::max(1.0, o.f_stat));
    CHECK(std::abs(fit.aic - o.aic) < 1e-10 * std::abs(o.aic));
    CHECK(std::abs(fit.bic - o.bic) < 1e-10 * std::abs(o.bic));
    CHECK(std::abs((fit.bic - fit.aic) - static_cast<double>(fit.n_params) * (std::log(40.0) - 2)) < 1e-9);

    // residuals are orthogonal to the standardized design
    const MatrixXd xs = stats::standardize(x);
    MatrixXd design(40, p + 1);
    design << VectorXd::Ones(40), x;
    const VectorXd resid = y - design * fit.coefficients;
    CHECK((xs.transpose() * resid).cwiseAbs().maxCoeff() < 1e-9);

    // standard errors from the oracle's (X'X)^-1
    const MatrixXd cov = (design.transpose() * design).inverse() * fit.sigma * fit.sigma;
    for (Eigen::Index k = 0; k <= p; ++k) CHECK(fit.std_errors[k] == doctest::Approx(std::sqrt(cov(k, k))).epsilon(1e-8));
  }
}

TEST_CASE("ols without intercept") {
  std::mt19937_64 gen(3);
  const MatrixXd x = gaussian(gen, 30, 3);
  const VectorXd y = x * Eigen::Vector3d(1, -2, 0.5) + 0.1 * gaussian(gen, 30, 1);
  const auto fit = stats::ols(y, x, false, {"a", "b", "c"});
  const auto o = oracle::ols_normal_equations(y, x, false);
  CHECK((fit.coefficients - o.beta).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(fit.r_squared - o.r_squared) < 1e-10);
  CHECK(fit.names.front() == "a");
}

TEST_CASE("ols names aliased columns") {
  std::mt19937_64 gen(5);
  MatrixXd x = gaussian(gen, 20, 3);
  x.col(2) = x.col(0) * 2 - x.col(1);
  const VectorXd y = gaussian(gen, 20, 1);
  CHECK_THROWS_WITH(stats::ols(y, x, true, {"a", "b", "c"}), doctest::Contains("aliased"));
  CHECK_THROWS(stats::ols(VectorXd(gaussian(gen, 3, 1)), MatrixXd(gaussian(gen, 3, 3)), true));
}

TEST_CASE("cca examples") {
  std::mt19937_64 gen(7);
  const MatrixXd x = gaussian(gen, 25, 1);
  const auto self = stats::cca(x, x);
  CHECK(std::abs(self.correlations[0] - 1.0) < 1e-10);

  const auto null = stats::cca(gaussian(gen, 200, 2), gaussian(gen, 200, 2));
  CHECK(null.correlations[0] < 0.25);
}

TEST_CASE("cca matches the brute-force and eigen oracles") {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index py = 2 + static_cast<Eigen::Index>(gen() % 3);
    MatrixXd x = gaussian(gen, 6 + static_cast<Eigen::Index>(gen() % 20), 2);
    MatrixXd y = gaussian(gen, x.rows(), py);
    y.col(0) += 0.8 * x.col(0);
    const auto fit = stats::cca(x, y);
    const auto [r1, r2] = oracle::cca_two_by_brute_force(x, y);
    CHECK(std::abs(fit.correlations[0] - r1) < 1e-6);
    CHECK(std::abs(fit.correlations[1] - r2) < 1e-6);
    CHECK((fit.correlations - oracle::cca_eigen(x, y)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("cca score contract") {
  std::mt19937_64 gen(19);
  MatrixXd x = gaussian(gen, 40, 4), y = gaussian(gen, 40, 3);
  y += 0.5 * x.leftCols(3);
  const auto fit = stats::cca(x, y);
  const Eigen::Index d = fit.correlations.size();
  REQUIRE(d == 3);
  for (Eigen::Index k = 0; k < d; ++k) {
    const VectorXd u = fit.x_scores.col(k), v = fit.y_scores.col(k);
    CHECK(std::abs((u.array() - u.mean()).square().sum() / 39 - 1) < 1e-9);
    CHECK(std::abs((v.array() - v.mean()).square().sum() / 39 - 1) < 1e-9);
    CHECK(std::abs(corr(u, v) - fit.correlations[k]) < 1e-9);
    if (k > 0) CHECK(fit.correlations[k] <= fit.correlations[k - 1]);
    for (Eigen::Index j = 0; j < k; ++j) {
      CHECK(std::abs(corr(fit.x_scores.col(j), u)) < 1e-8);
      CHECK(std::abs(corr(fit.y_scores.col(j), v)) < 1e-8);
    }
    Eigen::Index arg;
    fit.x_coefficients.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(fit.x_coefficients(arg, k) > 0);
  }
}

TEST_CASE("cca invariance and symmetry") {
  std::mt19937_64 gen(29);
  MatrixXd x = gaussian(gen, 30, 3), y = gaussian(gen, 30, 2);
  y.col(1) += x.col(2);
  const auto base = stats::cca(x, y);
  MatrixXd xt = x * gaussian(gen, 3, 3);  // invertible with probability one
  xt.rowwise() += Eigen::RowVector3d(5, -2, 7);
  CHECK((stats::cca(xt, y).correlations - base.correlations).cwiseAbs().maxCoeff() < 1e-9);
  const auto swapped = stats::cca(y, x);
  CHECK((swapped.correlations - base.correlations).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index k = 0; k < 2; ++k) {
    const double sign = swapped.y_coefficients.col(k).dot(base.x_coefficients.col(k)) > 0 ? 1 : -1;
    CHECK((sign * swapped.y_coefficients.col(k) - base.x_coefficients.col(k)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("cca errors") {
  std::mt19937_64 gen(37);
  MatrixXd x = gaussian(gen, 10, 3);
  x.col(2) = x.col(0) + x.col(1);
  CHECK_THROWS_WITH(stats::cca(x, gaussian(gen, 10, 2), {"a", "b", "c"}), doctest::Contains("collinear"));
  CHECK_THROWS(stats::cca(gaussian(gen, 3, 3), gaussian(gen, 3, 1)));
}

TEST_CASE("wilks examples") {
  const auto zero = stats::wilks_test(Eigen::Vector2d(0, 0), 40, 3, 2);
  CHECK(zero[0].lambda == 1);
  CHECK(zero[0].statistic == 0);
  CHECK(zero[0].p_value == doctest::Approx(1));
  const auto one = stats::wilks_test(Eigen::Vector2d(1, 0.2), 40, 3, 2);
  CHECK(one[0].lambda == 0);
  CHECK(one[0].p_value == 0);
  const auto rows = stats::wilks_test(Eigen::Vector2d(0.9, 0.3), 40, 12, 8);
  CHECK(std::abs(rows[0].lambda - 0.1729) < 1e-12);
  CHECK(rows[0].df == 96);
  CHECK(rows[1].df == 77);
  const double bartlett = -(40 - 1 - (12 + 8 + 1) / 2.0) * std::log(0.1729);
  CHECK(rows[0].statistic == doctest::Approx(bartlett).epsilon(1e-12));
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(96), bartlett));
  CHECK(rows[0].p_value == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("indicator files") {
  std::istringstream a("unit,x1,x2\nB,1,2\nA,3,4\nC,5,7\n");
  std::istringstream b("unit,y\nA,10\nB,20\nC,30\n");
  const auto x = stats::read_indicators(a, "a.csv");
  const auto y = stats::align_units(x, stats::read_indicators(b, "b.csv"));
  CHECK(y.units == x.units);
  CHECK(y.values(0, 0) == 20);
  std::istringstream gap("unit,x1\nA,1\nB,\n");
  CHECK_THROWS_WITH(stats::read_indicators(gap, "g.csv"), doctest::Contains("'B'"));
  std::istringstream other("unit,y\nA,1\nD,2\nC,3\n");
  CHECK_THROWS_WITH(stats::align_units(x, stats::read_indicators(other, "o.csv")), doctest::Contains("B"));
}

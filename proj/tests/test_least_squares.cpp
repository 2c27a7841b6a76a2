#include <doctest.h>

#include <cmath>
#include <random>

#include "nvgrad/least_squares.hpp"

using namespace nvgrad;
using Eigen::VectorXd;

TEST_CASE("exponential decay is recovered exactly from clean data") {
  const int m = 40;
  VectorXd t = VectorXd::LinSpaced(m, 0.0, 4.0), y(m);
  for (int i = 0; i < m; ++i) y(i) = 2.5 * std::exp(-1.3 * t(i)) + 0.4;
  auto res = [&](const VectorXd& p) -> VectorXd {
    return (p(0) * (-p(1) * t.array()).exp() + p(2)).matrix() - y;
  };
  auto jac = [&](const VectorXd& p) {
    Eigen::MatrixXd j(m, 3);
    j.col(0) = (-p(1) * t.array()).exp().matrix();
    j.col(1) = (-p(0) * t.array() * (-p(1) * t.array()).exp()).matrix();
    j.col(2).setOnes();
    return j;
  };
  const LeastSquaresResult r = levenberg_marquardt(res, jac, VectorXd::Constant(3, 1.0));
  CHECK(r.params(0) == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(r.params(1) == doctest::Approx(1.3).epsilon(1e-9));
  CHECK(r.params(2) == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(r.rss < 1e-20);
}

TEST_CASE("covariance of a linear model equals the OLS covariance") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.1);
  const int m = 30;
  VectorXd x = VectorXd::LinSpaced(m, -1.0, 2.0), y(m);
  for (int i = 0; i < m; ++i) y(i) = 0.7 * x(i) - 0.2 + noise(rng);
  Eigen::MatrixXd a(m, 2);
  a.col(0) = x;
  a.col(1).setOnes();
  auto res = [&](const VectorXd& p) -> VectorXd { return a * p - y; };
  auto jac = [&](const VectorXd&) { return a; };
  const LeastSquaresResult r = levenberg_marquardt(res, jac, VectorXd::Zero(2));
  const VectorXd ols = a.colPivHouseholderQr().solve(y);
  CHECK(r.params(0) == doctest::Approx(ols(0)).epsilon(1e-10));
  CHECK(r.params(1) == doctest::Approx(ols(1)).epsilon(1e-10));
  const double s2 = (a * ols - y).squaredNorm() / (m - 2);
  const Eigen::MatrixXd cov = s2 * (a.transpose() * a).inverse();
  CHECK((r.covariance - cov).norm() < 1e-10 * cov.norm());
  CHECK(r.standard_errors()(0) == doctest::Approx(std::sqrt(cov(0, 0))).epsilon(1e-10));
}

TEST_CASE("solver failures") {
  auto res = [](const VectorXd& p) -> VectorXd {
    VectorXd r(2);
    r << 10 * (p(1) - p(0) * p(0)), 1 - p(0);
    return r;
  };
  auto jac = [](const VectorXd& p) {
    Eigen::MatrixXd j(2, 2);
    j << -20 * p(0), 10, -1, 0;
    return j;
  };
  LeastSquaresOptions tight;
  tight.max_iterations = 1;
  VectorXd start(2);
  start << -1.2, 1.0;
  CHECK_THROWS_AS(levenberg_marquardt(res, jac, start, tight), NumericError);
  const LeastSquaresResult ok = levenberg_marquardt(res, jac, start);
  CHECK(ok.params(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(ok.params(1) == doctest::Approx(1.0).epsilon(1e-8));

  auto under = [](const VectorXd& p) -> VectorXd { return VectorXd::Constant(1, p.sum()); };
  auto under_j = [](const VectorXd&) { return Eigen::MatrixXd::Ones(1, 2); };
  CHECK_THROWS_AS(levenberg_marquardt(under, under_j, VectorXd::Zero(2)), NumericError);
}

#include "tslab/ols.hpp"
#include "tslab/random.hpp"

#include <gtest/gtest.h>

#include <Eigen/Cholesky>

using namespace tslab;

TEST(Ols, InterceptIsMean) {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  const auto fit = ols(Eigen::MatrixXd::Ones(3, 1), y);
  EXPECT_NEAR(fit.coefficients[0], 2.0, 1e-14);
}

TEST(Ols, ExactLine) {
  Eigen::MatrixXd x(10, 2);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 1;
    x(i, 1) = i;
    y[i] = 2.0 * i + 1.0;
  }
  const auto fit = ols(x, y);
  EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-12);
  EXPECT_NEAR(fit.coefficients[1], 2.0, 1e-12);
  EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ols, MatchesNormalEquations) {
  Rng rng(17);
  const Eigen::Index n = 100, k = 3;
  Eigen::MatrixXd x(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = rng.normal();
  const Eigen::VectorXd y = x * Eigen::Vector3d(0.5, -1.0, 2.0) + 0.1 * rng.normal_vector(n);
  const auto fit = ols(x, y);

  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd beta = xtx.ldlt().solve(x.transpose() * y);
  EXPECT_LT((fit.coefficients - beta).norm() / beta.norm(), 1e-8);

  // Covariance oracle: sigma^2 (X'X)^-1 with sigma^2 = ssr / (n - k).
  const Eigen::VectorXd resid = y - x * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(n - k);
  const Eigen::VectorXd se = (s2 * xtx.inverse().diagonal().array()).sqrt();
  EXPECT_LT((fit.standard_errors - se).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(fit.sigma2, s2, 1e-12);

  const double ll = -0.5 * n * (std::log(2 * std::numbers::pi) + std::log(resid.squaredNorm() / n) + 1);
  EXPECT_NEAR(fit.log_likelihood, ll, 1e-9);
  EXPECT_NEAR(fit.aic(), -2 * ll + 2 * k, 1e-9);
}

TEST(Ols, FloatScalar) {
  Eigen::MatrixXf x(4, 2);
  x << 1, 0, 1, 1, 1, 2, 1, 3;
  Eigen::VectorXf y(4);
  y << 1, 3, 5, 7;
  const OlsFit<float> fit = ols(x, y);
  EXPECT_NEAR(fit.coefficients[1], 2.0f, 1e-5f);
}

TEST(Ols, AcceptsExpressions) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 1);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, 0, 4);
  const auto fit = ols(2.0 * x, y.array().square().matrix());
  EXPECT_NEAR(fit.coefficients[0], 3.0, 1e-14);
}

TEST(Ols, Errors) {
  EXPECT_THROW(ols(Eigen::MatrixXd::Ones(3, 2), Eigen::VectorXd::Ones(2)), std::invalid_argument);
  EXPECT_THROW(ols(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1)), std::invalid_argument);
  EXPECT_THROW(ols(Eigen::MatrixXd::Ones(5, 2), Eigen::VectorXd::Ones(5)), std::invalid_argument);
}

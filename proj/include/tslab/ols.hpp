#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tslab {

template <typename Scalar>
struct OlsFit {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector coefficients;
  Vector standard_errors;
  Vector residuals;
  /// Residual variance with dof correction, ssr / (rows - cols).
  Scalar sigma2 = 0;
  Scalar ssr = 0;
  /// Gaussian log-likelihood at the ML variance ssr / rows.
  Scalar log_likelihood = 0;

  Eigen::Index observations() const { return residuals.size(); }
  Eigen::Index parameters() const { return coefficients.size(); }
  Scalar aic() const { return Scalar(-2) * log_likelihood + Scalar(2) * Scalar(parameters()); }
  Scalar t_value(Eigen::Index i) const { return coefficients[i] / standard_errors[i]; }
};

/// Least squares via column-pivoting Householder QR. Throws
/// std::invalid_argument on a dimension mismatch, fewer rows than columns,
/// or a rank-deficient design.
template <typename DesignDerived, typename ResponseDerived>
OlsFit<typename DesignDerived::Scalar> ols(const Eigen::MatrixBase<DesignDerived>& design,
                                           const Eigen::MatrixBase<ResponseDerived>& response) {
  using Scalar = typename DesignDerived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (response.size() != n) throw std::invalid_argument("ols: response length does not match design rows");
  if (k == 0 || n < k) throw std::invalid_argument("ols: need rows >= columns > 0");

  const Matrix x = design;
  const Vector y = response;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < k) throw std::invalid_argument("ols: design matrix is rank deficient");

  OlsFit<Scalar> fit;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - x * fit.coefficients;
  fit.ssr = fit.residuals.squaredNorm();
  const Eigen::Index dof = n - k;
  fit.sigma2 = dof > 0 ? fit.ssr / Scalar(dof) : Scalar(0);

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization.
  const auto r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  Matrix r_inv = r.solve(Matrix::Identity(k, k));
  const Vector diag_permuted = r_inv.rowwise().squaredNorm();
  Vector diag(k);
  for (Eigen::Index i = 0; i < k; ++i) diag[qr.colsPermutation().indices()[i]] = diag_permuted[i];
  fit.standard_errors = (fit.sigma2 * diag.array()).sqrt().matrix();

  const Scalar nobs = Scalar(n);
  using std::log;
  fit.log_likelihood = -nobs / Scalar(2) *
                       (log(Scalar(2) * std::numbers::pi_v<Scalar>) + log(fit.ssr / nobs) + Scalar(1));
  return fit;
}

}  // namespace tslab

#pragma once

#include <Eigen/Dense>

#include "aucmi/random.hpp"

namespace aucmi::mi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ridge added to the normal-equations diagonal of an ill-conditioned or
/// separated design: 1e-5 * trace(X'X) / p.
double stabilizing_ridge(const Matrix& design);

/// Least-squares fit; design includes the intercept column.
struct LinearFit {
  Vector coef;
  Matrix xtx_inverse;  // (X'X + ridge I)^{-1}
  double rss = 0.0;
  double df = 1.0;     // max(n - p, 1)
  bool ridged = false;
};

LinearFit fit_linear(const Matrix& design, const Vector& y);

/// Bayesian linear-regression draw: sigma* = sqrt(rss / chi2_df),
/// beta* = coef + chol(xtx_inverse) z sigma*.
struct LinearDraw {
  Vector beta;
  double sigma = 0.0;
};
LinearDraw draw_linear_posterior(const LinearFit& fit, RandomStream& rng);

enum class LogisticStabilizer {
  Ridge,    // refit with a ridge penalty when separation or non-convergence is detected
  Augment,  // pseudo-observation augmentation (White, Daniel & Royston 2010), ridge as last resort
};

struct LogisticFit {
  Vector coef;
  Matrix covariance;  // inverse penalised observed information at coef
  bool ridged = false;
  bool augmented = false;
  int iterations = 0;
};

/// Weighted IRLS with step halving. Returns std::nullopt-like failure through
/// `converged`; see fit_logistic_stabilized for the policy wrapper.
struct IrlsResult {
  Vector coef;
  Matrix covariance;
  bool converged = false;
  int iterations = 0;
  double max_abs_eta = 0.0;
};
IrlsResult irls_logistic(const Matrix& design, const Vector& y, const Vector& weights,
                         double ridge, int max_iterations);

/// Fit with the chosen stabilizer. `design` includes the intercept column;
/// augmentation statistics are computed from `augment_source` (predictor
/// columns only, all rows), matching the donor-free chained-equations setup.
/// Throws std::runtime_error when even the ridge refit does not converge.
LogisticFit fit_logistic_stabilized(const Matrix& design, const Vector& y,
                                    LogisticStabilizer stabilizer,
                                    const Matrix& augment_source);

/// mean + chol(cov) z, with diagonal jitter if cov is numerically not PD.
Vector draw_mvn(const Vector& mean, const Matrix& cov, RandomStream& rng);

inline double inv_logit(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

}  // namespace aucmi::mi

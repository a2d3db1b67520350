#include "aucmi/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aucmi::mi {
namespace {

constexpr double kSeparationEta = 25.0;
constexpr double kConditionFloor = 1e-12;

// Lower Cholesky factor of a symmetric matrix, jittering the diagonal if needed.
Matrix robust_cholesky(const Matrix& cov) {
  Matrix sym = 0.5 * (cov + cov.transpose());
  double jitter = 0.0;
  const double scale = std::max(sym.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::LLT<Matrix> llt(sym + jitter * Matrix::Identity(sym.rows(), sym.cols()));
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = jitter == 0.0 ? 1e-12 * scale : jitter * 100.0;
  }
  throw std::runtime_error("covariance matrix is not positive definite");
}

}  // namespace

double stabilizing_ridge(const Matrix& design) {
  const double trace = design.colwise().squaredNorm().sum();
  return 1e-5 * trace / static_cast<double>(design.cols());
}

LinearFit fit_linear(const Matrix& design, const Vector& y) {
  const Matrix xtx = design.transpose() * design;
  const Vector xty = design.transpose() * y;
  const Eigen::Index p = design.cols();

  LinearFit fit;
  Eigen::LLT<Matrix> llt(xtx);
  if (llt.info() != Eigen::Success || llt.rcond() < kConditionFloor) {
    fit.ridged = true;
    llt.compute(xtx + stabilizing_ridge(design) * Matrix::Identity(p, p));
    if (llt.info() != Eigen::Success) throw std::runtime_error("least-squares design is singular");
  }
  fit.coef = llt.solve(xty);
  fit.xtx_inverse = llt.solve(Matrix::Identity(p, p));
  fit.rss = (y - design * fit.coef).squaredNorm();
  fit.df = std::max(static_cast<double>(design.rows() - p), 1.0);
  return fit;
}

LinearDraw draw_linear_posterior(const LinearFit& fit, RandomStream& rng) {
  LinearDraw draw;
  draw.sigma = std::sqrt(fit.rss / rng.chi_squared(fit.df));
  Vector z(fit.coef.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  draw.beta = fit.coef + robust_cholesky(fit.xtx_inverse) * z * draw.sigma;
  return draw;
}

IrlsResult irls_logistic(const Matrix& design, const Vector& y, const Vector& weights,
                         double ridge, int max_iterations) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  const Matrix penalty = ridge * Matrix::Identity(p, p);

  auto penalized_deviance = [&](const Vector& beta) {
    const Vector eta = design * beta;
    double dev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + exp(-|eta|)) form avoids overflow
      const double e = eta[i];
      const double log1pexp = std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e)));
      dev += 2.0 * weights[i] * (log1pexp - y[i] * e);
    }
    return dev + ridge * beta.squaredNorm();
  };

  IrlsResult out;
  Vector beta = Vector::Zero(p);
  double dev = penalized_deviance(beta);
  Matrix info(p, p);
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector eta = design * beta;
    Vector w(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = inv_logit(eta[i]);
      const double var = std::max(mu * (1.0 - mu), 1e-12);
      w[i] = weights[i] * var;
      z[i] = eta[i] + (y[i] - mu) / var;
    }
    info = design.transpose() * w.asDiagonal() * design + penalty;
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success) break;
    Vector candidate = ldlt.solve(design.transpose() * (w.asDiagonal() * z));

    double cand_dev = penalized_deviance(candidate);
    for (int half = 0; half < 30 && !(std::isfinite(cand_dev) && cand_dev <= dev + 1e-12); ++half) {
      candidate = 0.5 * (candidate + beta);
      cand_dev = penalized_deviance(candidate);
    }
    if (!std::isfinite(cand_dev)) break;
    const double change = std::abs(cand_dev - dev) / (std::abs(cand_dev) + 0.1);
    beta = candidate;
    dev = cand_dev;
    out.iterations = it;
    if (change < 1e-8) {
      out.converged = true;
      break;
    }
  }

  const Vector eta = design * beta;
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = inv_logit(eta[i]);
    w[i] = weights[i] * mu * (1.0 - mu);
  }
  info = design.transpose() * w.asDiagonal() * design + penalty;
  Eigen::LDLT<Matrix> ldlt(info);
  out.covariance = ldlt.solve(Matrix::Identity(p, p));
  out.coef = beta;
  out.max_abs_eta = eta.size() ? eta.cwiseAbs().maxCoeff() : 0.0;
  if (!out.covariance.allFinite()) out.converged = false;
  return out;
}

LogisticFit fit_logistic_stabilized(const Matrix& design, const Vector& y,
                                    LogisticStabilizer stabilizer,
                                    const Matrix& augment_source) {
  Matrix x = design;
  Vector yy = y;
  Vector w = Vector::Ones(design.rows());
  bool augmented = false;

  const Eigen::Index q = augment_source.cols();
  if (stabilizer == LogisticStabilizer::Augment && q > 0 && augment_source.rows() > 1) {
    // Four pseudo rows per predictor: mean +- sd/2 on that predictor (clamped
    // to its range), others at their means, once with y=0 and once with y=1.
    // Total pseudo weight equals the number of coefficients.
    const Vector mean = augment_source.colwise().mean();
    const Vector sd = ((augment_source.rowwise() - mean.transpose()).colwise().squaredNorm() /
                       static_cast<double>(augment_source.rows() - 1))
                          .cwiseSqrt();
    const Vector lo = augment_source.colwise().minCoeff();
    const Vector hi = augment_source.colwise().maxCoeff();
    const Eigen::Index extra = 4 * q;
    const Eigen::Index n = design.rows();
    x.conservativeResize(n + extra, Eigen::NoChange);
    yy.conservativeResize(n + extra);
    w.conservativeResize(n + extra);
    Eigen::Index r = n;
    for (Eigen::Index j = 0; j < q; ++j) {
      for (double label : {0.0, 1.0}) {
        for (double sign : {0.5, -0.5}) {
          x(r, 0) = 1.0;
          x.row(r).tail(q) = mean.transpose();
          x(r, 1 + j) = std::clamp(mean[j] + sign * sd[j], lo[j], hi[j]);
          yy[r] = label;
          w[r] = static_cast<double>(q + 1) / static_cast<double>(extra);
          ++r;
        }
      }
    }
    augmented = true;
  }

  IrlsResult fit = irls_logistic(x, yy, w, 0.0, 25);
  bool ridged = false;
  if (!fit.converged || fit.max_abs_eta > kSeparationEta) {
    ridged = true;
    fit = irls_logistic(x, yy, w, stabilizing_ridge(x), 200);
    if (!fit.converged) throw std::runtime_error("logistic regression did not converge");
  }
  return LogisticFit{fit.coef, fit.covariance, ridged, augmented, fit.iterations};
}

Vector draw_mvn(const Vector& mean, const Matrix& cov, RandomStream& rng) {
  Vector z(mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  return mean + robust_cholesky(cov) * z;
}

}  // namespace aucmi::mi

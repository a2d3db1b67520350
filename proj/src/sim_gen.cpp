#include "aucmi/sim_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aucmi/quantiles.hpp"
#include "aucmi/roc_core.hpp"

namespace aucmi::sim {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Components that do not depend on beta1, shared across a bisection.
struct CrnPool {
  std::vector<double> d;
  std::vector<double> base;  // beta0 + beta2'Z + sigma_t * eps
  std::vector<double> slope; // multiplier of beta1 and of the beta3'Z term
  std::vector<double> dz;    // beta3'Z for diseased rows
};

CrnPool make_pool(const GenerativeParams& params, std::size_t size, RandomStream& rng) {
  const MatrixXd z = gen_covariates(size, params, rng);
  CrnPool pool;
  pool.d = gen_disease(z, params.alpha0, params.alpha1, rng);
  pool.base.resize(size);
  pool.dz.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto row = z.row(static_cast<Eigen::Index>(i));
    pool.base[i] = params.beta0 + row.dot(params.beta2) + params.sigma_t * rng.normal();
    pool.dz[i] = pool.d[i] * row.dot(params.beta3);
  }
  return pool;
}

double pool_auc(const CrnPool& pool, double beta1) {
  std::vector<double> x, y;
  x.reserve(pool.d.size());
  y.reserve(pool.d.size());
  for (std::size_t i = 0; i < pool.d.size(); ++i) {
    if (pool.d[i] == 1.0)
      y.push_back(pool.base[i] + beta1 + pool.dz[i]);
    else
      x.push_back(pool.base[i]);
  }
  return roc::auc_hat(roc::GroupedScores(std::move(x), std::move(y)));
}

}  // namespace

MatrixXd reference_sigma_z() {
  MatrixXd s(kCovariates, kCovariates);
  s << 1.0, 0.0, 0.3, 0.4, -0.4,
       0.0, 1.0, 0.2, 0.2, 0.0,
       0.3, 0.2, 1.0, 0.7, -0.5,
       0.4, 0.2, 0.7, 1.0, -0.2,
      -0.4, 0.0, -0.5, -0.2, 1.0;
  return s;
}

GenerativeParams::GenerativeParams(double a0, double b1)
    : mu_z(VectorXd::Zero(kCovariates)),
      sigma_z(reference_sigma_z()),
      alpha0(a0),
      alpha1(VectorXd::Ones(kCovariates)),
      beta0(0.0),
      beta1(b1),
      beta2(VectorXd::Constant(kCovariates, 0.1)),
      beta3(VectorXd::Constant(kCovariates, 0.05)),
      sigma_t(1.0) {
  validate();
}

void GenerativeParams::validate() {
  const Eigen::Index p = mu_z.size();
  if (sigma_z.rows() != p || sigma_z.cols() != p || alpha1.size() != p || beta2.size() != p ||
      beta3.size() != p)
    throw std::invalid_argument("generative parameters have inconsistent dimensions");
  if (!(sigma_t > 0.0)) throw std::invalid_argument("sigma_t must be positive");
  if (!sigma_z.isApprox(sigma_z.transpose(), 1e-12))
    throw std::invalid_argument("sigma_z must be symmetric");
  Eigen::LLT<MatrixXd> llt(sigma_z);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("sigma_z is not positive definite");
  chol_ = llt.matrixL();
}

const MatrixXd& GenerativeParams::cholesky() const { return chol_; }

MatrixXd gen_covariates(std::size_t n, const GenerativeParams& params, RandomStream& rng) {
  const Eigen::Index p = params.mu_z.size();
  MatrixXd z(static_cast<Eigen::Index>(n), p);
  VectorXd e(p);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index k = 0; k < p; ++k) e[k] = rng.normal();
    z.row(i) = (params.mu_z + params.cholesky() * e).transpose();
  }
  return z;
}

std::vector<double> gen_disease(const MatrixXd& z, double alpha0, const VectorXd& alpha1,
                                RandomStream& rng) {
  if (z.cols() != alpha1.size()) throw std::invalid_argument("gen_disease: dimension mismatch");
  std::vector<double> d(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double eta = alpha0 + z.row(i).dot(alpha1);
    d[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return d;
}

std::vector<double> gen_biomarker(const std::vector<double>& d, const MatrixXd& z,
                                  const GenerativeParams& params, RandomStream& rng) {
  if (static_cast<Eigen::Index>(d.size()) != z.rows())
    throw std::invalid_argument("gen_biomarker: dimension mismatch");
  std::vector<double> t(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto row = z.row(static_cast<Eigen::Index>(i));
    const double mu = params.beta0 + params.beta1 * d[i] + row.dot(params.beta2) +
                      d[i] * row.dot(params.beta3);
    t[i] = mu + params.sigma_t * rng.normal();
  }
  return t;
}

std::vector<std::uint8_t> gen_missingness(const std::vector<double>& t, const MatrixXd& z,
                                          const MissingnessParams& missing, RandomStream& rng) {
  std::vector<std::uint8_t> r(t.size(), 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    bool forced = t[i] > missing.t_threshold;
    for (Eigen::Index k = 0; k < z.cols() && !forced; ++k)
      forced = z(static_cast<Eigen::Index>(i), k) > missing.z_thresholds[k];
    // One uniform per row keeps the stream aligned whatever the thresholds are.
    const double u = rng.uniform();
    r[i] = (!forced && u < missing.gamma) ? 1 : 0;
  }
  return r;
}

SimulatedSample generate(std::size_t n, const GenerativeParams& params,
                         const MissingnessParams& missing, RandomStream& rng) {
  SimulatedSample s;
  s.z = gen_covariates(n, params, rng);
  s.d = gen_disease(s.z, params.alpha0, params.alpha1, rng);
  s.t = gen_biomarker(s.d, s.z, params, rng);
  s.r = gen_missingness(s.t, s.z, missing, rng);
  return s;
}

namespace {

StudyDataset build_dataset(const SimulatedSample& s, bool apply_mask) {
  std::vector<Column> cols;
  Column d = Column::observed("D", ColumnRole::Disease, ColumnKind::Binary, s.d);
  if (apply_mask) d.missing = s.r;
  cols.push_back(std::move(d));
  cols.push_back(Column::observed("T", ColumnRole::Biomarker, ColumnKind::Continuous, s.t));
  for (Eigen::Index k = 0; k < s.z.cols(); ++k) {
    std::vector<double> v(s.z.rows());
    for (Eigen::Index i = 0; i < s.z.rows(); ++i) v[i] = s.z(i, k);
    cols.push_back(Column::observed("Z" + std::to_string(k + 1), ColumnRole::Covariate,
                                    ColumnKind::Continuous, std::move(v)));
  }
  return StudyDataset(std::move(cols));
}

}  // namespace

StudyDataset SimulatedSample::complete_dataset() const { return build_dataset(*this, false); }
StudyDataset SimulatedSample::observed_dataset() const { return build_dataset(*this, true); }

MissingnessParams calibrate_thresholds(const GenerativeParams& params, double gamma, double q1,
                                       double q2, std::size_t calibration_size,
                                       RandomStream& rng) {
  if (calibration_size < 100000) throw std::invalid_argument("calibration_size must be at least 1e5");
  if (!(q1 > 0.0 && q1 < 1.0) || !(q2 > 0.0 && q2 < 1.0))
    throw std::invalid_argument("quantile levels must lie in (0,1)");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");

  const MatrixXd z = gen_covariates(calibration_size, params, rng);
  const auto d = gen_disease(z, params.alpha0, params.alpha1, rng);
  auto t = gen_biomarker(d, z, params, rng);

  // Type-7 quantile of the calibration sample.
  const double h = (static_cast<double>(t.size()) - 1.0) * q1;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(lo), t.end());
  const double t_lo = t[lo];
  double t_hi = t_lo;
  if (lo + 1 < t.size())
    t_hi = *std::min_element(t.begin() + static_cast<std::ptrdiff_t>(lo) + 1, t.end());

  MissingnessParams m;
  m.gamma = gamma;
  m.q1 = q1;
  m.q2 = q2;
  m.t_threshold = t_lo + (h - std::floor(h)) * (t_hi - t_lo);
  m.z_thresholds.resize(params.mu_z.size());
  const double zq = stats::normal_quantile(q2);
  for (Eigen::Index k = 0; k < params.mu_z.size(); ++k)
    m.z_thresholds[k] = params.mu_z[k] + zq * std::sqrt(params.sigma_z(k, k));
  return m;
}

MonteCarloEstimate population_auc(const GenerativeParams& params, std::size_t mc_size,
                                  RandomStream& rng) {
  const MatrixXd z = gen_covariates(mc_size, params, rng);
  const auto d = gen_disease(z, params.alpha0, params.alpha1, rng);
  const auto t = gen_biomarker(d, z, params, rng);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) (d[i] == 1.0 ? y : x).push_back(t[i]);
  if (x.size() < 2 || y.size() < 2)
    throw std::runtime_error("population_auc: sample has fewer than two subjects in a class");
  const auto table = roc::placements(roc::GroupedScores(std::move(x), std::move(y)));
  return {table.theta, std::sqrt(roc::var_delong(table))};
}

MonteCarloEstimate missing_rate(const GenerativeParams& params, const MissingnessParams& missing,
                                std::size_t mc_size, RandomStream& rng) {
  const SimulatedSample s = generate(mc_size, params, missing, rng);
  double count = 0.0;
  for (auto r : s.r) count += r;
  const double p = count / static_cast<double>(mc_size);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(mc_size))};
}

double calibrate_beta1(const GenerativeParams& params, double target_theta, std::size_t pool_size,
                       RandomStream& rng, double tolerance) {
  if (!(target_theta >= 0.5 && target_theta < 1.0))
    throw std::invalid_argument("target AUC must lie in [0.5, 1)");
  const CrnPool pool = make_pool(params, pool_size, rng);

  double lo = 0.0, hi = 10.0;
  const double f_lo = pool_auc(pool, lo) - target_theta;
  if (std::abs(f_lo) < tolerance) return lo;
  const double f_hi = pool_auc(pool, hi) - target_theta;
  if (f_lo > 0.0 || f_hi < 0.0)
    throw std::runtime_error("calibrate_beta1: target AUC not bracketed by beta1 in [0, 10]");
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = pool_auc(pool, mid) - target_theta;
    if (std::abs(f) < tolerance || hi - lo < 1e-7) return mid;
    (f < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double published_beta1(double alpha0, double theta) {
  static constexpr double kThetas[] = {0.8, 0.9, 0.95, 0.99};
  static constexpr double kBeta1Prev50[] = {0.8089, 1.4486, 1.9767, 2.9670};
  static constexpr double kBeta1Prev70[] = {0.8319, 1.4729, 2.0019, 2.9939};
  for (int k = 0; k < 4; ++k) {
    if (std::abs(theta - kThetas[k]) > 1e-9) continue;
    if (std::abs(alpha0) < 1e-9) return kBeta1Prev50[k];
    if (std::abs(alpha0 - 1.6111) < 1e-9) return kBeta1Prev70[k];
  }
  throw std::out_of_range("no published beta1 for this (alpha0, theta)");
}

double prevalence_for_alpha0(double alpha0) {
  if (std::abs(alpha0) < 1e-9) return 0.5;
  if (std::abs(alpha0 - 1.6111) < 1e-9) return 0.7;
  throw std::out_of_range("no prevalence label for this alpha0");
}

}  // namespace aucmi::sim

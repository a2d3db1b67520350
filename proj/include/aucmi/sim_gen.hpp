#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aucmi/dataset.hpp"
#include "aucmi/random.hpp"

namespace aucmi::sim {

inline constexpr int kCovariates = 5;

/// Covariate matrix of the reference design (unit variances, mixed correlations).
Eigen::MatrixXd reference_sigma_z();

/// Parameters of Z ~ MVN(mu_z, sigma_z), logit P(D=1|Z) = alpha0 + alpha1'Z,
/// T | D, Z ~ N(beta0 + beta1 D + beta2'Z + beta3'DZ, sigma_t^2).
class GenerativeParams {
 public:
  /// Reference defaults: mu_z = 0, sigma_z = reference_sigma_z(), alpha1 = 1,
  /// beta0 = 0, beta2 = 0.1, beta3 = 0.05, sigma_t = 1.
  GenerativeParams(double alpha0, double beta1);

  Eigen::VectorXd mu_z;
  Eigen::MatrixXd sigma_z;
  double alpha0 = 0.0;
  Eigen::VectorXd alpha1;
  double beta0 = 0.0;
  double beta1 = 0.0;
  Eigen::VectorXd beta2;
  Eigen::VectorXd beta3;
  double sigma_t = 1.0;

  /// Checks shapes, sigma_t > 0 and sigma_z symmetric PD (Cholesky); caches the factor.
  void validate();
  const Eigen::MatrixXd& cholesky() const;

 private:
  Eigen::MatrixXd chol_;
};

struct MissingnessParams {
  double gamma = 0.0;
  double q1 = 0.5;
  double q2 = 0.5;
  double t_threshold = 0.0;
  Eigen::VectorXd z_thresholds;
};

/// One generated sample with its verification indicator (R = 1 means missing).
struct SimulatedSample {
  Eigen::MatrixXd z;
  std::vector<double> d;
  std::vector<double> t;
  std::vector<std::uint8_t> r;

  std::size_t size() const { return t.size(); }
  /// Columns D, T, Z1..Z5 with nothing missing.
  StudyDataset complete_dataset() const;
  /// Same columns with D flagged missing where R = 1.
  StudyDataset observed_dataset() const;
};

Eigen::MatrixXd gen_covariates(std::size_t n, const GenerativeParams& params, RandomStream& rng);
std::vector<double> gen_disease(const Eigen::MatrixXd& z, double alpha0,
                                const Eigen::VectorXd& alpha1, RandomStream& rng);
std::vector<double> gen_biomarker(const std::vector<double>& d, const Eigen::MatrixXd& z,
                                  const GenerativeParams& params, RandomStream& rng);
/// R = 0 whenever T exceeds t_threshold or any Z_i exceeds its threshold;
/// otherwise R = 1 with probability gamma.
std::vector<std::uint8_t> gen_missingness(const std::vector<double>& t, const Eigen::MatrixXd& z,
                                          const MissingnessParams& missing, RandomStream& rng);

SimulatedSample generate(std::size_t n, const GenerativeParams& params,
                         const MissingnessParams& missing, RandomStream& rng);

/// Thresholds from one calibration sample of size calibration_size (>= 1e5):
/// empirical q1 quantile of T, analytic mu + Phi^{-1}(q2) sigma for each Z_i.
MissingnessParams calibrate_thresholds(const GenerativeParams& params, double gamma, double q1,
                                       double q2, std::size_t calibration_size, RandomStream& rng);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// AUC between diseased and non-diseased biomarkers of one large sample, with
/// its DeLong standard error.
MonteCarloEstimate population_auc(const GenerativeParams& params, std::size_t mc_size,
                                  RandomStream& rng);

/// Mean of R over one large sample (the realised missing rate).
MonteCarloEstimate missing_rate(const GenerativeParams& params, const MissingnessParams& missing,
                                std::size_t mc_size, RandomStream& rng);

/// Bisection on beta1 in [0, 10] over a fixed common-random-number pool of
/// size pool_size, until |AUC - target| < tolerance. Throws std::runtime_error
/// when the target is not bracketed.
double calibrate_beta1(const GenerativeParams& params, double target_theta, std::size_t pool_size,
                       RandomStream& rng, double tolerance = 1e-4);

/// Published beta1 for the reference design at (alpha0 in {0, 1.6111},
/// theta in {0.8, 0.9, 0.95, 0.99}); throws std::out_of_range otherwise.
double published_beta1(double alpha0, double theta);

/// Prevalence label for an alpha0 of the reference design (0 -> 0.5, 1.6111 -> 0.7).
double prevalence_for_alpha0(double alpha0);

struct ScenarioConfig {
  std::uint64_t id = 0;
  std::size_t n = 0;
  GenerativeParams params{0.0, 0.0};
  MissingnessParams missing;
  double target_theta = 0.0;
  double target_phi = 0.0;
  double rho_label = 0.0;
  std::size_t replicate_count = 0;
};

}  // namespace aucmi::sim

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "aucmi/sim_gen.hpp"

using namespace aucmi;
using namespace aucmi::sim;

TEST_CASE("reference design") {
  const auto s = reference_sigma_z();
  REQUIRE(s.rows() == kCovariates);
  CHECK(s.isApprox(s.transpose()));
  for (int k = 0; k < kCovariates; ++k) CHECK(s(k, k) == 1.0);
  GenerativeParams p(0.0, 1.0);
  CHECK_NOTHROW(p.validate());
  CHECK((p.cholesky() * p.cholesky().transpose()).isApprox(s, 1e-12));
}

TEST_CASE("parameter validation") {
  GenerativeParams p(0.0, 1.0);
  p.sigma_t = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), "sigma_t must be positive", std::invalid_argument);
  p = GenerativeParams(0.0, 1.0);
  p.sigma_z(0, 1) = p.sigma_z(1, 0) = 1.5;
  CHECK_THROWS_WITH_AS(p.validate(), "sigma_z is not positive definite", std::invalid_argument);
  p = GenerativeParams(0.0, 1.0);
  p.beta2.resize(3);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("published tables") {
  CHECK(published_beta1(0.0, 0.8) == 0.8089);
  CHECK(published_beta1(0.0, 0.99) == 2.9670);
  CHECK(published_beta1(1.6111, 0.95) == 2.0019);
  CHECK_THROWS_AS(published_beta1(0.5, 0.8), std::out_of_range);
  CHECK_THROWS_AS(published_beta1(0.0, 0.85), std::out_of_range);
  CHECK(prevalence_for_alpha0(0.0) == 0.5);
  CHECK(prevalence_for_alpha0(1.6111) == 0.7);
  CHECK_THROWS_AS(prevalence_for_alpha0(2.0), std::out_of_range);
}

TEST_CASE("covariates have the reference moments") {
  GenerativeParams p(0.0, 1.0);
  p.validate();
  RandomStream rng(51, {});
  const auto z = gen_covariates(100000, p, rng);
  const Eigen::VectorXd mean = z.colwise().mean();
  const Eigen::MatrixXd c = (z.rowwise() - mean.transpose()).transpose() *
                            (z.rowwise() - mean.transpose()) / double(z.rows() - 1);
  CHECK(mean.cwiseAbs().maxCoeff() < 0.015);
  CHECK((c - p.sigma_z).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("prevalence follows alpha0") {
  RandomStream rng(52, {});
  for (double a0 : {0.0, 1.6111}) {
    GenerativeParams p(a0, 1.0);
    p.validate();
    const auto z = gen_covariates(200000, p, rng);
    const auto d = gen_disease(z, a0, p.alpha1, rng);
    double m = 0;
    for (double v : d) m += v;
    CHECK(m / d.size() == doctest::Approx(prevalence_for_alpha0(a0)).epsilon(0.02));
  }
}

TEST_CASE("forced verification rule") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 2);
  z(2, 1) = 3.0;
  const std::vector<double> t{0.0, 5.0, 0.0, 0.0};
  MissingnessParams m;
  m.t_threshold = 1.0;
  m.z_thresholds = Eigen::VectorXd::Constant(2, 1.0);
  RandomStream rng(53, {});
  m.gamma = 1.0;
  CHECK(gen_missingness(t, z, m, rng) == std::vector<std::uint8_t>{1, 0, 0, 1});
  m.gamma = 0.0;
  CHECK(gen_missingness(t, z, m, rng) == std::vector<std::uint8_t>{0, 0, 0, 0});
}

TEST_CASE("missingness draws one uniform per row") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(50, 1);
  std::vector<double> t(50, 0.0);
  MissingnessParams m;
  m.gamma = 0.5;
  m.z_thresholds = Eigen::VectorXd::Constant(1, 1.0);
  m.t_threshold = 1.0;
  RandomStream a(54, {}), b(54, {});
  gen_missingness(t, z, m, a);
  m.t_threshold = -1.0;  // every row forced
  gen_missingness(t, z, m, b);
  CHECK(a.uniform() == b.uniform());
}

TEST_CASE("calibrated thresholds") {
  GenerativeParams p(0.0, 1.4486);
  p.validate();
  RandomStream rng(55, {});
  const auto m = calibrate_thresholds(p, 0.9, 0.85, 0.9, 100000, rng);
  CHECK(m.gamma == 0.9);
  for (int k = 0; k < kCovariates; ++k) CHECK(m.z_thresholds[k] == doctest::Approx(1.281552).epsilon(1e-6));
  const auto m2 = calibrate_thresholds(p, 0.9, 0.85, 0.85, 100000, rng);
  CHECK(m2.z_thresholds[0] == doctest::Approx(1.036433).epsilon(1e-6));

  // the T threshold cuts a fresh sample at about q1
  const auto s = generate(100000, p, m, rng);
  double below = 0;
  for (double v : s.t) below += v <= m.t_threshold;
  CHECK(below / s.size() == doctest::Approx(0.85).epsilon(0.01));

  CHECK_THROWS_AS(calibrate_thresholds(p, 0.9, 0.85, 0.9, 1000, rng), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_thresholds(p, 0.9, 1.0, 0.9, 100000, rng), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_thresholds(p, 1.1, 0.5, 0.9, 100000, rng), std::invalid_argument);
}

TEST_CASE("generation is deterministic per stream") {
  GenerativeParams p(1.6111, 2.0);
  p.validate();
  MissingnessParams m;
  m.gamma = 0.5;
  m.t_threshold = 1.0;
  m.z_thresholds = Eigen::VectorXd::Constant(kCovariates, 1.0);
  RandomStream a(56, {3}), b(56, {3}), c(56, {4});
  const auto x = generate(200, p, m, a), y = generate(200, p, m, b), w = generate(200, p, m, c);
  CHECK(x.t == y.t);
  CHECK(x.r == y.r);
  CHECK(x.z == y.z);
  CHECK(x.t != w.t);
}

TEST_CASE("sample datasets") {
  GenerativeParams p(0.0, 2.0);
  p.validate();
  MissingnessParams m;
  m.gamma = 0.7;
  m.t_threshold = 0.5;
  m.z_thresholds = Eigen::VectorXd::Constant(kCovariates, 1.0);
  RandomStream rng(57, {});
  const auto s = generate(300, p, m, rng);
  const auto full = s.complete_dataset(), obs = s.observed_dataset();
  REQUIRE(full.cols() == 2 + kCovariates);
  CHECK(full.column(0).name == "D");
  CHECK(full.column(1).name == "T");
  CHECK(full.column(6).name == "Z5");
  CHECK(full.complete());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(obs.disease().is_missing(i) == (s.r[i] == 1));
    if (s.r[i]) CHECK(s.t[i] <= m.t_threshold);
  }
}

TEST_CASE("population auc grows with beta1") {
  double prev = 0;
  for (double b1 : {0.5, 1.0, 2.0, 3.0}) {
    GenerativeParams p(0.0, b1);
    p.validate();
    RandomStream rng(58, {});
    const auto a = population_auc(p, 20000, rng);
    CHECK(a.value > prev);
    CHECK(a.std_error > 0.0);
    CHECK(a.std_error < 0.01);
    prev = a.value;
  }
}

TEST_CASE("beta1 calibration lands near the published value") {
  GenerativeParams p(0.0, 0.0);
  p.validate();
  RandomStream rng(59, {});
  const double b1 = calibrate_beta1(p, 0.9, 100000, rng);
  CHECK(b1 == doctest::Approx(1.4486).epsilon(0.03));
  CHECK_THROWS_AS(calibrate_beta1(p, 1.0, 1000, rng), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_beta1(p, 0.4, 1000, rng), std::invalid_argument);
}

TEST_CASE("missing rate estimate") {
  GenerativeParams p(0.0, 1.0);
  p.validate();
  MissingnessParams m;
  m.gamma = 0.5;
  m.t_threshold = 1e9;
  m.z_thresholds = Eigen::VectorXd::Constant(kCovariates, 1e9);
  RandomStream rng(60, {});
  const auto r = missing_rate(p, m, 100000, rng);
  CHECK(r.value == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.std_error == doctest::Approx(std::sqrt(0.25 / 100000)).epsilon(0.01));
}

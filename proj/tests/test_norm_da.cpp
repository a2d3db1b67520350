#include <doctest.h>

#include <cmath>

#include "aucmi/norm_da.hpp"
#include "aucmi/random.hpp"

using namespace aucmi;
using namespace aucmi::mi;

namespace {

Eigen::MatrixXd correlated(RandomStream& rng, Eigen::Index n) {
  Eigen::MatrixXd d(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    d(i, 0) = 1 + a;
    d(i, 1) = -2 + 0.6 * a + 0.8 * b;
    d(i, 2) = 0.5 + 0.3 * a - 0.2 * b + c;
  }
  return d;
}

}  // namespace

TEST_CASE("em on complete data returns the ML estimates") {
  RandomStream rng(41, {});
  const auto d = correlated(rng, 50);
  const MissingMask none = MissingMask::Constant(50, 3, false);
  const auto e = norm_em(d, none);
  CHECK(e.converged);
  const Eigen::VectorXd mean = d.colwise().mean();
  const Eigen::MatrixXd centred = d.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / 50.0;
  CHECK((e.mean - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((e.cov - cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("em matches the monotone bivariate closed form") {
  RandomStream rng(42, {});
  const Eigen::Index n = 200;
  Eigen::MatrixXd d(n, 2);
  MissingMask miss = MissingMask::Constant(n, 2, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, 0) = rng.normal();
    d(i, 1) = 1 + 0.7 * d(i, 0) + 0.5 * rng.normal();
    miss(i, 1) = d(i, 0) > 0.3 && rng.uniform() < 0.7;
  }

  // Factored likelihood: Y1 from all rows, Y2 | Y1 from complete rows.
  double s1 = 0, s11 = 0, c1 = 0, c2 = 0, c11 = 0, c12 = 0, nc = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    s1 += d(i, 0);
    s11 += d(i, 0) * d(i, 0);
    if (miss(i, 1)) continue;
    nc += 1;
    c1 += d(i, 0);
    c2 += d(i, 1);
  }
  const double mu1 = s1 / n, v11 = s11 / n - mu1 * mu1;
  c1 /= nc;
  c2 /= nc;
  double r22 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (miss(i, 1)) continue;
    c11 += (d(i, 0) - c1) * (d(i, 0) - c1);
    c12 += (d(i, 0) - c1) * (d(i, 1) - c2);
  }
  const double slope = c12 / c11, icept = c2 - slope * c1;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!miss(i, 1)) r22 += std::pow(d(i, 1) - icept - slope * d(i, 0), 2);
  r22 /= nc;
  const double mu2 = icept + slope * mu1;
  const double v12 = slope * v11, v22 = r22 + slope * slope * v11;

  Eigen::MatrixXd masked = d;
  for (Eigen::Index i = 0; i < n; ++i)
    if (miss(i, 1)) masked(i, 1) = std::nan("");
  const auto e = norm_em(masked, miss, 20000, 1e-13);
  CHECK(e.converged);
  CHECK(e.mean(0) == doctest::Approx(mu1).epsilon(1e-9));
  CHECK(e.mean(1) == doctest::Approx(mu2).epsilon(1e-9));
  CHECK(e.cov(0, 0) == doctest::Approx(v11).epsilon(1e-9));
  CHECK(e.cov(0, 1) == doctest::Approx(v12).epsilon(1e-9));
  CHECK(e.cov(1, 1) == doctest::Approx(v22).epsilon(1e-9));
}

TEST_CASE("em input checks") {
  Eigen::MatrixXd d(3, 2);
  d << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(norm_em(d, MissingMask::Constant(2, 2, false)), std::invalid_argument);
  MissingMask m = MissingMask::Constant(3, 2, false);
  m(0, 1) = m(1, 1) = true;
  CHECK_THROWS_AS(norm_em(d, m), std::invalid_argument);
}

TEST_CASE("data augmentation keeps observed cells and fills missing ones") {
  RandomStream rng(43, {});
  Eigen::MatrixXd d = correlated(rng, 60);
  MissingMask miss = MissingMask::Constant(60, 3, false);
  for (Eigen::Index i = 0; i < 60; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      if (rng.uniform() < 0.2 && !(i < 3)) {
        miss(i, j) = true;
        d(i, j) = std::nan("");
      }
  RandomStream a(44, {}), b(44, {});
  const auto x = norm_da_impute(d, miss, 4, 10, a);
  const auto y = norm_da_impute(d, miss, 4, 10, b);
  REQUIRE(x.size() == 4);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(x[k] == y[k]);
    CHECK(x[k].allFinite());
    for (Eigen::Index i = 0; i < 60; ++i)
      for (Eigen::Index j = 0; j < 3; ++j)
        if (!miss(i, j)) CHECK(x[k](i, j) == d(i, j));
  }
  CHECK_FALSE(x[0] == x[1]);
}

TEST_CASE("posterior mean draws centre on the sample mean") {
  RandomStream rng(45, {});
  const auto d = correlated(rng, 100);
  const MissingMask none = MissingMask::Constant(100, 3, false);
  const auto start = norm_em(d, none);
  NormChain chain(d, none, start, RandomStream(46, {}));
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(3);
  const int draws = 3000;
  for (int k = 0; k < draws; ++k) {
    chain.advance(1);
    acc += chain.mean();
  }
  acc /= draws;
  // sd of the posterior mean is about 0.1; the average of draws sits well inside that
  CHECK((acc - start.mean).cwiseAbs().maxCoeff() < 0.01);
}

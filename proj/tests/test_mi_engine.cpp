#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "aucmi/mi_engine.hpp"
#include "aucmi/quantiles.hpp"

using namespace aucmi;
using namespace aucmi::mi;

namespace {

Column masked(std::string name, ColumnRole role, ColumnKind kind, std::vector<double> v) {
  Column c{std::move(name), role, kind, std::move(v), {}};
  for (double x : c.values) c.missing.push_back(std::isnan(x) ? 1 : 0);
  return c;
}

// Disease depends on T and Z; roughly a quarter of D is missing.
StudyDataset random_dataset(RandomStream& rng, std::size_t n, double miss) {
  std::vector<double> d(n), t(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = rng.normal();
    d[i] = rng.uniform() < inv_logit(0.8 * z[i]) ? 1 : 0;
    t[i] = d[i] + 0.5 * z[i] + rng.normal();
    if (rng.uniform() < miss) d[i] = std::nan("");
  }
  // keep both classes observed
  d[0] = 0;
  d[1] = 1;
  return StudyDataset({masked("D", ColumnRole::Disease, ColumnKind::Binary, d),
                       masked("T", ColumnRole::Biomarker, ColumnKind::Continuous, t),
                       masked("Z1", ColumnRole::Covariate, ColumnKind::Continuous, z)});
}

ImputationSpec small_spec(ImputeMethod method) {
  ImputationSpec s;
  s.method = method;
  s.m = 3;
  s.iterations = 2;
  s.burn_in = 5;
  return s;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("method names") {
  for (auto m : {ImputeMethod::Pmm, ImputeMethod::LogReg, ImputeMethod::NormDa})
    CHECK(parse_impute_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_impute_method("hotdeck"), std::invalid_argument);
}

TEST_CASE("spec validation") {
  ImputationSpec s;
  CHECK_NOTHROW(s.validate());
  s.m = 1;
  CHECK_THROWS_WITH_AS(s.validate(), "imputation count m must be at least 2", std::invalid_argument);
  s = {};
  s.iterations = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.donor_count = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.burn_in = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("rubin pooling by hand") {
  const std::vector<double> t{0.5, 0.7}, v{0.01, 0.01};
  const auto r = pool(t, v);
  CHECK(r.theta_bar == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r.within_w == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(r.between_b == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(r.total_v == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(r.nu == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
  const double q = stats::t_quantile(0.975, 16.0 / 9.0);
  CHECK(r.ci.upper == doctest::Approx(0.6 + q * 0.2).epsilon(1e-12));
}

TEST_CASE("pooling with no within variance has m - 1 degrees of freedom") {
  const std::vector<double> t{0.6, 0.7, 0.8, 0.9}, v{0, 0, 0, 0};
  const auto r = pool(t, v);
  CHECK(r.nu == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.total_v == doctest::Approx(1.25 * (0.05 / 3.0)).epsilon(1e-12));
}

TEST_CASE("pooling identical estimates uses the normal reference") {
  const std::vector<double> t(5, 0.73), v(5, 0.0025);
  const auto r = pool(t, v);
  CHECK(r.between_b == 0.0);
  CHECK(r.theta_bar == 0.73);
  CHECK(std::isinf(r.nu));
  CHECK(r.ci.upper - 0.73 == doctest::Approx(1.959963984540054 * 0.05).epsilon(1e-12));
}

TEST_CASE("pooling input errors") {
  const std::vector<double> one{0.5}, two{0.5, 0.6}, neg{0.01, -0.01};
  CHECK_THROWS_AS(pool(one, one), std::invalid_argument);
  CHECK_THROWS_AS(pool(two, one), std::invalid_argument);
  CHECK_THROWS_AS(pool(two, neg), std::invalid_argument);
}

TEST_CASE("adaptive rounding thresholds") {
  CHECK(adaptive_rounding_threshold(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(adaptive_rounding_threshold(0.8) == doctest::Approx(0.463352).epsilon(1e-6));
  CHECK(adaptive_rounding_threshold(0.9) == doctest::Approx(0.515535).epsilon(1e-6));
  CHECK(std::isfinite(adaptive_rounding_threshold(0.0)));
  CHECK(std::isfinite(adaptive_rounding_threshold(1.0)));
}

TEST_CASE("adaptive rounding touches imputed entries only") {
  const std::vector<double> v{1, 0, 1, 1, 0.47, 0.45};
  const std::vector<std::uint8_t> miss{0, 0, 0, 0, 1, 1};
  // full-column mean = 3.92/6 = 0.6533, threshold about 0.466
  const auto out = adaptive_round(v, miss);
  CHECK(out == std::vector<double>{1, 0, 1, 1, 1, 0});
  // imputed-only mean = 0.46, threshold about 0.52
  CHECK(adaptive_round(v, miss, RoundingMean::ImputedOnly) == std::vector<double>{1, 0, 1, 1, 0, 0});
}

TEST_CASE("pmm with one donor copies the nearest observed case") {
  const std::size_t n = 12;
  std::vector<double> y(n);
  std::vector<std::uint8_t> miss(n, 0);
  Matrix x(n, 1);
  for (std::size_t i = 0; i < n; ++i) x(i, 0) = y[i] = 10.0 * i;
  // perfect fit: the posterior draw collapses onto the estimate
  miss[4] = 1;
  y[4] = std::nan("");
  x(4, 0) = 31.0;
  RandomStream rng(21, {});
  const auto out = impute_pmm(y, miss, x, 1, rng);
  CHECK(out[4] == 30.0);
  for (std::size_t i = 0; i < n; ++i)
    if (!miss[i]) CHECK(bit_equal(out[i], y[i]));
}

TEST_CASE("pmm values come from the observed set") {
  RandomStream rng(22, {});
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 8 + rng.index(20);
    std::vector<double> y(n);
    std::vector<std::uint8_t> miss(n);
    Matrix x(n, 2);
    std::vector<double> observed;
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = rng.normal();
      x(i, 1) = rng.normal();
      y[i] = x(i, 0) + rng.normal();
      miss[i] = i >= 3 && rng.uniform() < 0.4;
      if (!miss[i]) observed.push_back(y[i]);
    }
    const auto out = impute_pmm(y, miss, x, 1 + int(rng.index(5)), rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (!miss[i]) {
        REQUIRE(bit_equal(out[i], y[i]));
      } else {
        bool found = false;
        for (double o : observed) found = found || bit_equal(o, out[i]);
        REQUIRE(found);
      }
    }
  }
}

TEST_CASE("logreg imputation yields binary values") {
  RandomStream rng(23, {});
  const std::size_t n = 60;
  std::vector<double> y(n);
  std::vector<std::uint8_t> miss(n);
  Matrix x(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    y[i] = rng.uniform() < inv_logit(x(i, 0)) ? 1 : 0;
    miss[i] = i % 4 == 0;
  }
  for (auto s : {LogisticStabilizer::Ridge, LogisticStabilizer::Augment}) {
    const auto out = impute_logreg(y, miss, x, s, rng);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK((out[i] == 0.0 || out[i] == 1.0));
      if (!miss[i]) CHECK(out[i] == y[i]);
    }
  }
}

TEST_CASE("complete data is copied unchanged") {
  RandomStream gen(24, {});
  const auto data = random_dataset(gen, 40, 0.0);
  for (auto m : {ImputeMethod::Pmm, ImputeMethod::LogReg, ImputeMethod::NormDa}) {
    RandomStream rng(25, {});
    const auto out = impute(data, small_spec(m), rng);
    REQUIRE(out.size() == 3);
    for (const auto& d : out) CHECK(d == data);
  }
}

TEST_CASE("imputations close the missing cells and keep observed ones") {
  RandomStream gen(26, {});
  for (int c = 0; c < 20; ++c) {
    const auto data = random_dataset(gen, 50, 0.3);
    for (auto m : {ImputeMethod::Pmm, ImputeMethod::LogReg, ImputeMethod::NormDa}) {
      RandomStream rng(27, {std::uint64_t(c)});
      for (const auto& d : impute(data, small_spec(m), rng)) {
        REQUIRE(d.complete());
        const auto& orig = data.disease();
        for (std::size_t i = 0; i < d.rows(); ++i) {
          REQUIRE((d.disease().values[i] == 0.0 || d.disease().values[i] == 1.0));
          if (!orig.is_missing(i)) REQUIRE(bit_equal(d.disease().values[i], orig.values[i]));
          REQUIRE(bit_equal(d.biomarker().values[i], data.biomarker().values[i]));
        }
      }
    }
  }
}

TEST_CASE("imputation is reproducible from the stream") {
  RandomStream gen(28, {});
  const auto data = random_dataset(gen, 80, 0.3);
  for (auto m : {ImputeMethod::Pmm, ImputeMethod::LogReg, ImputeMethod::NormDa}) {
    RandomStream a(29, {1}), b(29, {1}), c(29, {2});
    const auto x = impute(data, small_spec(m), a), y = impute(data, small_spec(m), b),
               z = impute(data, small_spec(m), c);
    CHECK(x == y);
    bool differs = false;
    for (std::size_t k = 0; k < x.size(); ++k) differs = differs || !(x[k] == z[k]);
    CHECK(differs);
  }
}

TEST_CASE("imputer errors") {
  const double na = std::nan("");
  const StudyDataset no_obs({masked("D", ColumnRole::Disease, ColumnKind::Binary, {0, 1, 1, 0}),
                             masked("T", ColumnRole::Biomarker, ColumnKind::Continuous, {1, 2, 3, 4}),
                             masked("Z", ColumnRole::Covariate, ColumnKind::Continuous, {na, na, na, na})});
  for (auto m : {ImputeMethod::Pmm, ImputeMethod::LogReg, ImputeMethod::NormDa})
    CHECK_THROWS_WITH_AS(make_imputer(no_obs, small_spec(m), RandomStream(1, {})), "nothing to fit",
                         std::invalid_argument);

  const StudyDataset one_class({masked("D", ColumnRole::Disease, ColumnKind::Binary, {1, 1, na, 1}),
                                masked("T", ColumnRole::Biomarker, ColumnKind::Continuous, {1, 2, 3, 4})});
  for (auto m : {ImputeMethod::Pmm, ImputeMethod::LogReg, ImputeMethod::NormDa})
    CHECK_THROWS_WITH_AS(make_imputer(one_class, small_spec(m), RandomStream(1, {})),
                         "degenerate outcome column", std::invalid_argument);
}

TEST_CASE("initial fill draws from observed values") {
  RandomStream gen(30, {});
  const auto data = random_dataset(gen, 30, 0.5);
  RandomStream rng(31, {});
  const auto w = initial_fill(data, rng);
  REQUIRE(w.model_columns.size() == 3);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double v = w.values[0][i];
    CHECK((v == 0.0 || v == 1.0));
    if (!data.disease().is_missing(i)) CHECK(v == data.disease().values[i]);
  }
}

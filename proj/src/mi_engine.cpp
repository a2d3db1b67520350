#include "aucmi/mi_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "aucmi/norm_da.hpp"
#include "aucmi/quantiles.hpp"

namespace aucmi::mi {
namespace {

std::vector<std::size_t> indices_where(std::span<const std::uint8_t> missing, bool want_missing) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < missing.size(); ++i)
    if ((missing[i] != 0) == want_missing) out.push_back(i);
  return out;
}

Matrix design_rows(const Matrix& predictors, const std::vector<std::size_t>& rows) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), predictors.cols() + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x(r, 0) = 1.0;
    x.row(r).tail(predictors.cols()) = predictors.row(static_cast<Eigen::Index>(rows[r]));
  }
  return x;
}

bool has_both_classes(const Column& col) {
  bool zero = false, one = false;
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col.is_missing(i)) continue;
    (col.values[i] == 1.0 ? one : zero) = true;
  }
  return zero && one;
}

StudyDataset to_dataset(const WorkingData& work) {
  StudyDataset out = work.original;
  for (std::size_t k = 0; k < work.model_columns.size(); ++k) {
    Column& col = out.column(work.model_columns[k]);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (!col.is_missing(i)) continue;
      col.values[i] = work.values[k][i];
      col.missing[i] = 0;
    }
  }
  return out;
}

class CopyImputer final : public Imputer {
 public:
  explicit CopyImputer(StudyDataset data) : data_(std::move(data)) {}
  StudyDataset next() override { return data_; }

 private:
  StudyDataset data_;
};

class ChainedImputer final : public Imputer {
 public:
  ChainedImputer(StudyDataset data, ImputationSpec spec, RandomStream rng)
      : data_(std::move(data)), spec_(spec), rng_(std::move(rng)) {}

  StudyDataset next() override {
    RandomStream stream = rng_.derive({draws_++});
    WorkingData work = initial_fill(data_, stream);
    for (int it = 0; it < spec_.iterations; ++it) chained_sweep(work, spec_, stream);
    return to_dataset(work);
  }

 private:
  StudyDataset data_;
  ImputationSpec spec_;
  RandomStream rng_;
  std::uint64_t draws_ = 0;
};

class NormImputer final : public Imputer {
 public:
  NormImputer(StudyDataset data, ImputationSpec spec, RandomStream rng)
      : data_(std::move(data)), spec_(spec), columns_(data_.model_columns()),
        chain_(build_chain(rng)) {}

  StudyDataset next() override {
    chain_.advance(spec_.burn_in);
    const Matrix& completed = chain_.impute_once();
    StudyDataset out = data_;
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      Column& col = out.column(columns_[k]);
      if (col.complete()) continue;
      std::vector<double> values(col.size());
      for (std::size_t i = 0; i < col.size(); ++i)
        values[i] = col.is_missing(i) ? completed(static_cast<Eigen::Index>(i), k) : col.values[i];
      if (col.kind == ColumnKind::Binary) {
        if (spec_.adaptive_rounding) {
          values = adaptive_round(values, col.missing, spec_.rounding_mean);
        } else {
          for (std::size_t i = 0; i < col.size(); ++i)
            if (col.is_missing(i)) values[i] = values[i] > 0.5 ? 1.0 : 0.0;
        }
      }
      for (std::size_t i = 0; i < col.size(); ++i) {
        if (!col.is_missing(i)) continue;
        col.values[i] = values[i];
        col.missing[i] = 0;
      }
    }
    return out;
  }

 private:
  NormChain build_chain(RandomStream& rng) {
    const auto n = static_cast<Eigen::Index>(data_.rows());
    const auto p = static_cast<Eigen::Index>(columns_.size());
    Matrix matrix(n, p);
    MissingMask mask(n, p);
    for (Eigen::Index k = 0; k < p; ++k) {
      const Column& col = data_.column(columns_[k]);
      for (Eigen::Index i = 0; i < n; ++i) {
        mask(i, k) = col.is_missing(i);
        matrix(i, k) = mask(i, k) ? 0.0 : col.values[i];
      }
    }
    const MvnEstimate start = norm_em(matrix, mask);
    return NormChain(std::move(matrix), std::move(mask), start, rng.derive({0x4e4f524dull}));
  }

  StudyDataset data_;
  ImputationSpec spec_;
  std::vector<std::size_t> columns_;
  NormChain chain_;
};

}  // namespace

std::string_view to_string(ImputeMethod m) {
  switch (m) {
    case ImputeMethod::Pmm: return "PMM";
    case ImputeMethod::LogReg: return "LR";
    case ImputeMethod::NormDa: return "NORM";
  }
  return "?";
}

ImputeMethod parse_impute_method(std::string_view s) {
  std::string v(s);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "pmm") return ImputeMethod::Pmm;
  if (v == "lr" || v == "logreg") return ImputeMethod::LogReg;
  if (v == "norm" || v == "normda") return ImputeMethod::NormDa;
  throw std::invalid_argument("unknown imputation method: " + std::string(s));
}

void ImputationSpec::validate() const {
  if (m < 2) throw std::invalid_argument("imputation count m must be at least 2");
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (donor_count < 1) throw std::invalid_argument("donor_count must be at least 1");
  if (burn_in < 1) throw std::invalid_argument("burn_in must be at least 1");
}

std::unique_ptr<Imputer> make_imputer(const StudyDataset& data, const ImputationSpec& spec,
                                      RandomStream rng) {
  spec.validate();
  if (data.complete()) return std::make_unique<CopyImputer>(data);

  const std::size_t min_observed = spec.method == ImputeMethod::NormDa ? 2 : 1;
  for (std::size_t c : data.model_columns()) {
    const Column& col = data.column(c);
    if (col.complete()) continue;
    if (col.size() - col.missing_count() < min_observed) throw std::invalid_argument("nothing to fit");
  }
  const Column& disease = data.disease();
  if (!disease.complete() && !has_both_classes(disease))
    throw std::invalid_argument("degenerate outcome column");

  if (spec.method == ImputeMethod::NormDa)
    return std::make_unique<NormImputer>(data, spec, std::move(rng));
  return std::make_unique<ChainedImputer>(data, spec, std::move(rng));
}

std::vector<StudyDataset> impute(const StudyDataset& data, const ImputationSpec& spec,
                                 RandomStream& rng) {
  auto imputer = make_imputer(data, spec, rng.derive({0x494d5055ull}));
  std::vector<StudyDataset> out;
  out.reserve(spec.m);
  for (int k = 0; k < spec.m; ++k) out.push_back(imputer->next());
  return out;
}

WorkingData initial_fill(const StudyDataset& data, RandomStream& rng) {
  WorkingData work{data, data.model_columns(), {}};
  for (std::size_t c : work.model_columns) {
    const Column& col = data.column(c);
    std::vector<double> values = col.values;
    const auto observed = indices_where(col.missing, false);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (!col.is_missing(i)) continue;
      if (observed.empty()) throw std::invalid_argument("nothing to fit");
      values[i] = col.values[observed[rng.index(observed.size())]];
    }
    work.values.push_back(std::move(values));
  }
  return work;
}

void chained_sweep(WorkingData& work, const ImputationSpec& spec, RandomStream& rng) {
  const std::size_t n = work.original.rows();
  const std::size_t k_cols = work.model_columns.size();
  for (std::size_t k = 0; k < k_cols; ++k) {
    const Column& col = work.original.column(work.model_columns[k]);
    if (col.complete()) continue;

    Matrix predictors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k_cols - 1));
    for (std::size_t other = 0, out = 0; other < k_cols; ++other) {
      if (other == k) continue;
      for (std::size_t i = 0; i < n; ++i)
        predictors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out)) =
            work.values[other][i];
      ++out;
    }

    const bool logistic = spec.method == ImputeMethod::LogReg && col.kind == ColumnKind::Binary &&
                          has_both_classes(col);
    work.values[k] = logistic
                         ? impute_logreg(work.values[k], col.missing, predictors, spec.stabilizer, rng)
                         : impute_pmm(work.values[k], col.missing, predictors, spec.donor_count, rng);
  }
}

std::vector<double> impute_pmm(std::span<const double> target,
                               std::span<const std::uint8_t> missing, const Matrix& predictors,
                               int donor_count, RandomStream& rng) {
  const auto obs = indices_where(missing, false);
  const auto mis = indices_where(missing, true);
  std::vector<double> out(target.begin(), target.end());
  if (mis.empty()) return out;
  if (obs.empty()) throw std::invalid_argument("nothing to fit");

  const Matrix x_obs = design_rows(predictors, obs);
  Vector y_obs(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t r = 0; r < obs.size(); ++r) y_obs[r] = target[obs[r]];

  const LinearFit fit = fit_linear(x_obs, y_obs);
  const LinearDraw draw = draw_linear_posterior(fit, rng);
  const Vector yhat_obs = x_obs * fit.coef;
  const Vector yhat_mis = design_rows(predictors, mis) * draw.beta;

  // Donor search over observed cases sorted by predicted value.
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return yhat_obs[a] < yhat_obs[b]; });
  std::vector<double> sorted(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) sorted[r] = yhat_obs[order[r]];

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(donor_count), obs.size());
  std::vector<std::size_t> donors;
  donors.reserve(k);
  for (std::size_t r = 0; r < mis.size(); ++r) {
    const double target_value = yhat_mis[r];
    auto right = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), target_value) - sorted.begin());
    std::size_t left = right;  // candidates are [left, right) after expansion
    donors.clear();
    while (donors.size() < k) {
      const bool can_left = left > 0;
      const bool can_right = right < sorted.size();
      if (can_left && (!can_right || target_value - sorted[left - 1] <= sorted[right] - target_value)) {
        donors.push_back(order[--left]);
      } else {
        donors.push_back(order[right++]);
      }
    }
    out[mis[r]] = target[obs[donors[rng.index(donors.size())]]];
  }
  return out;
}

std::vector<double> impute_logreg(std::span<const double> target,
                                  std::span<const std::uint8_t> missing,
                                  const Matrix& predictors, LogisticStabilizer stabilizer,
                                  RandomStream& rng) {
  const auto obs = indices_where(missing, false);
  const auto mis = indices_where(missing, true);
  std::vector<double> out(target.begin(), target.end());
  if (mis.empty()) return out;
  if (obs.empty()) throw std::invalid_argument("nothing to fit");

  const Matrix x_obs = design_rows(predictors, obs);
  Vector y_obs(static_cast<Eigen::Index>(obs.size()));
  bool zero = false, one = false;
  for (std::size_t r = 0; r < obs.size(); ++r) {
    y_obs[r] = target[obs[r]];
    (y_obs[r] == 1.0 ? one : zero) = true;
  }
  if (!(zero && one)) throw std::invalid_argument("degenerate outcome column");

  const LogisticFit fit = fit_logistic_stabilized(x_obs, y_obs, stabilizer, predictors);
  const Vector beta = draw_mvn(fit.coef, fit.covariance, rng);
  const Vector eta = design_rows(predictors, mis) * beta;
  for (std::size_t r = 0; r < mis.size(); ++r)
    out[mis[r]] = rng.uniform() <= inv_logit(eta[r]) ? 1.0 : 0.0;
  return out;
}

double adaptive_rounding_threshold(double omega) {
  constexpr double kEps = 1e-9;
  omega = std::clamp(omega, kEps, 1.0 - kEps);
  return omega - std::sqrt(omega * (1.0 - omega)) * stats::normal_quantile(omega);
}

std::vector<double> adaptive_round(std::span<const double> values,
                                   std::span<const std::uint8_t> missing, RoundingMean mode) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mode == RoundingMean::ImputedOnly && !missing[i]) continue;
    sum += values[i];
    ++count;
  }
  std::vector<double> out(values.begin(), values.end());
  if (count == 0) return out;
  const double threshold = adaptive_rounding_threshold(sum / static_cast<double>(count));
  for (std::size_t i = 0; i < values.size(); ++i)
    if (missing[i]) out[i] = values[i] > threshold ? 1.0 : 0.0;
  return out;
}

PooledResult pool(std::span<const double> theta_hats, std::span<const double> variances,
                  double level) {
  const std::size_t m = theta_hats.size();
  if (m < 2) throw std::invalid_argument("pooling requires m >= 2");
  if (variances.size() != m) throw std::invalid_argument("pooling inputs differ in length");
  for (double v : variances)
    if (!(v >= 0.0)) throw std::invalid_argument("pooling requires non-negative variances");

  const double md = static_cast<double>(m);
  PooledResult r;
  r.theta_bar = std::accumulate(theta_hats.begin(), theta_hats.end(), 0.0) / md;
  r.within_w = std::accumulate(variances.begin(), variances.end(), 0.0) / md;
  const auto [lo, hi] = std::minmax_element(theta_hats.begin(), theta_hats.end());
  if (*lo == *hi) {
    r.theta_bar = *lo;  // the mean of equal values can round away from them
  } else {
    double ss = 0.0;
    for (double t : theta_hats) ss += (t - r.theta_bar) * (t - r.theta_bar);
    r.between_b = ss / (md - 1.0);
  }
  r.total_v = r.within_w + (md + 1.0) / md * r.between_b;
  if (r.between_b > 0.0) {
    const double ratio = 1.0 + md / (md + 1.0) * r.within_w / r.between_b;
    r.nu = ratio * ratio * (md - 1.0);
  }
  r.ci = roc::wald_ci(r.theta_bar, r.total_v, level, r.nu);
  return r;
}

}  // namespace aucmi::mi

#include "aucmi/norm_da.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace aucmi::mi {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Conditional {
  MatrixXd regression;  // |M| x |O|: Sigma_MO Sigma_OO^{-1}
  MatrixXd cov;         // |M| x |M|: Sigma_MM - Sigma_MO Sigma_OO^{-1} Sigma_OM
};

MatrixXd select(const MatrixXd& a, const std::vector<Index>& r, const std::vector<Index>& c) {
  MatrixXd out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = a(r[i], c[j]);
  return out;
}

Conditional conditional(const MatrixXd& cov, const std::vector<Index>& obs,
                        const std::vector<Index>& mis) {
  Conditional out;
  const MatrixXd s_mm = select(cov, mis, mis);
  if (obs.empty()) {
    out.regression = MatrixXd::Zero(mis.size(), 0);
    out.cov = s_mm;
    return out;
  }
  const MatrixXd s_oo = select(cov, obs, obs);
  const MatrixXd s_mo = select(cov, mis, obs);
  Eigen::LDLT<MatrixXd> ldlt(s_oo);
  out.regression = ldlt.solve(s_mo.transpose()).transpose();
  out.cov = s_mm - out.regression * s_mo.transpose();
  return out;
}

// Groups rows by their missingness pattern; rows with nothing missing get an
// empty `missing` list.
template <typename Pattern>
std::vector<Pattern> group_patterns(const MissingMask& missing) {
  std::map<std::vector<bool>, Pattern> by_key;
  for (Index i = 0; i < missing.rows(); ++i) {
    std::vector<bool> key(missing.cols());
    for (Index j = 0; j < missing.cols(); ++j) key[j] = missing(i, j);
    auto [it, inserted] = by_key.try_emplace(key);
    if (inserted) {
      for (Index j = 0; j < missing.cols(); ++j)
        (key[j] ? it->second.missing : it->second.observed).push_back(j);
    }
    it->second.rows.push_back(i);
  }
  std::vector<Pattern> out;
  for (auto& [key, p] : by_key) out.push_back(std::move(p));
  return out;
}

struct EmPattern {
  std::vector<Index> rows, observed, missing;
};

MatrixXd jittered(const MatrixXd& cov) {
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return cov;
  const double scale = std::max(cov.diagonal().mean(), 1e-12);
  double jitter = 1e-8 * scale;
  for (int attempt = 0; attempt < 10; ++attempt, jitter *= 10.0) {
    MatrixXd c = cov + jitter * MatrixXd::Identity(cov.rows(), cov.cols());
    if (Eigen::LLT<MatrixXd>(c).info() == Eigen::Success) return c;
  }
  throw std::runtime_error("covariance estimate is not positive definite");
}

MatrixXd lower_cholesky(const MatrixXd& cov) {
  Eigen::LLT<MatrixXd> llt(jittered(0.5 * (cov + cov.transpose())));
  return llt.matrixL();
}

}  // namespace

MvnEstimate norm_em(const MatrixXd& data, const MissingMask& missing, int max_iterations,
                    double tolerance) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (missing.rows() != n || missing.cols() != p)
    throw std::invalid_argument("norm_em: mask shape does not match data");

  MvnEstimate est;
  est.mean = VectorXd::Zero(p);
  est.cov = MatrixXd::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    double s = 0.0, ss = 0.0;
    Index k = 0;
    for (Index i = 0; i < n; ++i) {
      if (missing(i, j)) continue;
      s += data(i, j);
      ss += data(i, j) * data(i, j);
      ++k;
    }
    if (k < 2) throw std::invalid_argument("norm_em: column has fewer than two observed values");
    est.mean[j] = s / static_cast<double>(k);
    est.cov(j, j) = std::max(ss / static_cast<double>(k) - est.mean[j] * est.mean[j], 0.0);
  }
  est.cov = jittered(est.cov);

  const auto patterns = group_patterns<EmPattern>(missing);
  for (int it = 1; it <= max_iterations; ++it) {
    VectorXd t1 = VectorXd::Zero(p);
    MatrixXd t2 = MatrixXd::Zero(p, p);
    for (const EmPattern& pat : patterns) {
      Conditional cond;
      if (!pat.missing.empty()) cond = conditional(est.cov, pat.observed, pat.missing);
      for (Index i : pat.rows) {
        VectorXd y = data.row(i).transpose();
        if (!pat.missing.empty()) {
          VectorXd dev(pat.observed.size());
          for (std::size_t k = 0; k < pat.observed.size(); ++k)
            dev[k] = y[pat.observed[k]] - est.mean[pat.observed[k]];
          const VectorXd mu_m = cond.regression * dev;
          for (std::size_t k = 0; k < pat.missing.size(); ++k)
            y[pat.missing[k]] = est.mean[pat.missing[k]] + mu_m[k];
        }
        t1 += y;
        t2.noalias() += y * y.transpose();
        for (std::size_t a = 0; a < pat.missing.size(); ++a)
          for (std::size_t b = 0; b < pat.missing.size(); ++b)
            t2(pat.missing[a], pat.missing[b]) += cond.cov(a, b);
      }
    }
    const VectorXd mean = t1 / static_cast<double>(n);
    MatrixXd cov = t2 / static_cast<double>(n) - mean * mean.transpose();
    cov = jittered(0.5 * (cov + cov.transpose()));
    const double change = std::max((mean - est.mean).cwiseAbs().maxCoeff(),
                                   (cov - est.cov).cwiseAbs().maxCoeff());
    est.mean = mean;
    est.cov = cov;
    est.iterations = it;
    if (change < tolerance) {
      est.converged = true;
      break;
    }
  }
  return est;
}

NormChain::NormChain(MatrixXd data, MissingMask missing, const MvnEstimate& start,
                     RandomStream rng)
    : data_(std::move(data)),
      missing_(std::move(missing)),
      mean_(start.mean),
      cov_(start.cov),
      rng_(std::move(rng)) {
  for (const EmPattern& p : group_patterns<EmPattern>(missing_))
    if (!p.missing.empty()) patterns_.push_back(Pattern{p.rows, p.observed, p.missing});
}

void NormChain::i_step() {
  for (const Pattern& pat : patterns_) {
    const Conditional cond = conditional(cov_, pat.observed, pat.missing);
    const MatrixXd chol = lower_cholesky(cond.cov);
    VectorXd dev(pat.observed.size());
    VectorXd z(pat.missing.size());
    for (Index i : pat.rows) {
      for (std::size_t k = 0; k < pat.observed.size(); ++k)
        dev[k] = data_(i, pat.observed[k]) - mean_[pat.observed[k]];
      for (Index k = 0; k < z.size(); ++k) z[k] = rng_.normal();
      const VectorXd draw = cond.regression * dev + chol * z;
      for (std::size_t k = 0; k < pat.missing.size(); ++k)
        data_(i, pat.missing[k]) = mean_[pat.missing[k]] + draw[k];
    }
  }
}

void NormChain::p_step() {
  const Index n = data_.rows();
  const Index p = data_.cols();
  const VectorXd ybar = data_.colwise().mean();
  const MatrixXd centered = data_.rowwise() - ybar.transpose();
  MatrixXd scatter = centered.transpose() * centered;
  const double df = static_cast<double>(n - 1);
  if (df < static_cast<double>(p)) throw std::runtime_error("norm_da: too few rows for the P-step");

  // Sigma^{-1} ~ Wishart(df, scatter^{-1}) via the Bartlett decomposition.
  for (int attempt = 0;; ++attempt) {
    Eigen::LLT<MatrixXd> scatter_llt(scatter);
    if (scatter_llt.info() == Eigen::Success) {
      const MatrixXd scale_chol =
          Eigen::LLT<MatrixXd>(scatter_llt.solve(MatrixXd::Identity(p, p))).matrixL();
      MatrixXd bartlett = MatrixXd::Zero(p, p);
      for (Index i = 0; i < p; ++i) {
        bartlett(i, i) = std::sqrt(rng_.chi_squared(df - static_cast<double>(i)));
        for (Index j = 0; j < i; ++j) bartlett(i, j) = rng_.normal();
      }
      const MatrixXd g = scale_chol * bartlett;  // lower triangular, W = g g'
      const MatrixXd g_inv =
          g.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(p, p));
      MatrixXd sigma = g_inv.transpose() * g_inv;
      sigma = 0.5 * (sigma + sigma.transpose());
      if (sigma.allFinite() && Eigen::LLT<MatrixXd>(sigma).info() == Eigen::Success) {
        cov_ = sigma;
        break;
      }
    }
    if (attempt == 3) throw std::runtime_error("inverse-Wishart draw failed");
    scatter += 1e-8 * std::max(scatter.diagonal().mean(), 1e-12) *
               std::pow(100.0, attempt) * MatrixXd::Identity(p, p);
  }

  const MatrixXd chol = lower_cholesky(cov_ / static_cast<double>(n));
  VectorXd z(p);
  for (Index k = 0; k < p; ++k) z[k] = rng_.normal();
  mean_ = ybar + chol * z;
}

void NormChain::advance(int steps) {
  for (int s = 0; s < steps; ++s) {
    i_step();
    p_step();
  }
}

const MatrixXd& NormChain::impute_once() {
  i_step();
  return data_;
}

std::vector<MatrixXd> norm_da_impute(const MatrixXd& data, const MissingMask& missing, int m,
                                     int burn_in, RandomStream& rng) {
  std::vector<MatrixXd> out;
  out.reserve(m);
  if (!missing.any()) {
    out.assign(m, data);
    return out;
  }
  const MvnEstimate start = norm_em(data, missing);
  NormChain chain(data, missing, start, rng.derive({0x4e4f524dull}));
  for (int k = 0; k < m; ++k) {
    chain.advance(burn_in);
    out.push_back(chain.impute_once());
  }
  return out;
}

}  // namespace aucmi::mi

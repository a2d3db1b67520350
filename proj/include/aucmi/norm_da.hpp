#pragma once

#include <vector>

#include <Eigen/Dense>

#include "aucmi/random.hpp"

namespace aucmi::mi {

using MissingMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct MvnEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // maximum-likelihood (divide-by-n)
  int iterations = 0;
  bool converged = false;
};

/// EM for a multivariate normal with an arbitrary missingness pattern.
/// Stops when the largest absolute parameter change drops below `tolerance`
/// or after `max_iterations`. Requires at least two observed values per column.
MvnEstimate norm_em(const Eigen::MatrixXd& data, const MissingMask& missing,
                    int max_iterations = 500, double tolerance = 1e-6);

/// Data-augmentation chain under the Jeffreys prior |Sigma|^{-(p+1)/2}:
/// I-step draws missing cells from their conditional normal, P-step draws
/// Sigma^{-1} ~ Wishart(n-1, A^{-1}) and mu | Sigma ~ N(ybar, Sigma/n).
class NormChain {
 public:
  NormChain(Eigen::MatrixXd data, MissingMask missing, const MvnEstimate& start,
            RandomStream rng);

  /// `steps` rounds of (I-step, P-step).
  void advance(int steps);
  /// One I-step at the current parameters; returns the completed data.
  const Eigen::MatrixXd& impute_once();

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  struct Pattern {
    std::vector<Eigen::Index> rows, observed, missing;
  };

  void i_step();
  void p_step();

  Eigen::MatrixXd data_;
  MissingMask missing_;
  std::vector<Pattern> patterns_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  RandomStream rng_;
};

/// m completed matrices: burn_in steps before the first and between consecutive ones.
std::vector<Eigen::MatrixXd> norm_da_impute(const Eigen::MatrixXd& data, const MissingMask& missing,
                                            int m, int burn_in, RandomStream& rng);

}  // namespace aucmi::mi

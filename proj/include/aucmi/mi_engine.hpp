#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "aucmi/dataset.hpp"
#include "aucmi/random.hpp"
#include "aucmi/regression.hpp"
#include "aucmi/roc_core.hpp"

namespace aucmi::mi {

/// Imputation technique. Pmm imputes every incomplete column by predictive
/// mean matching; LogReg uses logistic regression for binary columns and PMM
/// for continuous ones; NormDa is joint multivariate-normal data augmentation.
enum class ImputeMethod { Pmm, LogReg, NormDa };

std::string_view to_string(ImputeMethod m);
ImputeMethod parse_impute_method(std::string_view s);

/// Which entries feed the mean used by the adaptive rounding threshold.
enum class RoundingMean { FullColumn, ImputedOnly };

struct ImputationSpec {
  ImputeMethod method = ImputeMethod::Pmm;
  int donor_count = 5;
  int m = 10;
  int iterations = 5;
  int burn_in = 100;
  bool adaptive_rounding = true;
  RoundingMean rounding_mean = RoundingMean::FullColumn;
  LogisticStabilizer stabilizer = LogisticStabilizer::Augment;
  std::uint64_t rng_seed = 0;

  /// Throws std::invalid_argument on m < 2, iterations < 1, donor_count < 1, burn_in < 1.
  void validate() const;
};

/// Produces completed datasets one at a time. Each call to next() yields an
/// independent imputation (a fresh chained-equations run, or the next spaced
/// draw of one data-augmentation chain), so callers can redraw a single
/// imputation without disturbing the others.
class Imputer {
 public:
  virtual ~Imputer() = default;
  virtual StudyDataset next() = 0;
};

/// Validates the data against the spec and builds an imputer.
/// Errors: "nothing to fit" (an incomplete column with no usable observations)
/// and "degenerate outcome column" (observed disease status has one class).
std::unique_ptr<Imputer> make_imputer(const StudyDataset& data, const ImputationSpec& spec,
                                      RandomStream rng);

/// m completed datasets. Observed entries are copied bit-for-bit.
std::vector<StudyDataset> impute(const StudyDataset& data, const ImputationSpec& spec,
                                 RandomStream& rng);

/// Working state of one chained-equations run: current values for every model
/// column plus the original missingness mask.
struct WorkingData {
  StudyDataset original;
  std::vector<std::size_t> model_columns;
  std::vector<std::vector<double>> values;  // one vector per model column
};

/// Fills each missing entry with a uniform draw from its column's observed values.
WorkingData initial_fill(const StudyDataset& data, RandomStream& rng);

/// One sweep over the incomplete model columns, left to right by column
/// index; each is re-imputed from all other current columns.
void chained_sweep(WorkingData& work, const ImputationSpec& spec, RandomStream& rng);

/// Predictive mean matching with type-1 matching: observed cases are scored
/// with the least-squares estimate, missing cases with a posterior draw; each
/// missing entry copies the target of one of the donor_count closest observed
/// cases chosen uniformly. `predictors` excludes the intercept.
std::vector<double> impute_pmm(std::span<const double> target,
                               std::span<const std::uint8_t> missing, const Matrix& predictors,
                               int donor_count, RandomStream& rng);

/// Logistic-regression imputation with a normal-approximation coefficient draw.
std::vector<double> impute_logreg(std::span<const double> target,
                                  std::span<const std::uint8_t> missing,
                                  const Matrix& predictors, LogisticStabilizer stabilizer,
                                  RandomStream& rng);

/// omega - sqrt(omega (1 - omega)) * Phi^{-1}(omega), omega clipped into (0,1).
double adaptive_rounding_threshold(double omega);

/// Rounds the imputed entries of a binary column; observed entries are untouched.
std::vector<double> adaptive_round(std::span<const double> values,
                                   std::span<const std::uint8_t> missing,
                                   RoundingMean mode = RoundingMean::FullColumn);

struct PooledResult {
  double theta_bar = 0.0;
  double within_w = 0.0;
  double between_b = 0.0;
  double total_v = 0.0;
  double nu = stats::kInfiniteDf;
  roc::ConfidenceInterval ci;
};

/// Rubin's rules with a t reference at non-integer nu (normal when B = 0).
PooledResult pool(std::span<const double> theta_hats, std::span<const double> variances,
                  double level = 0.95);

}  // namespace aucmi::mi

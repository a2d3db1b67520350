#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aucmi/mi_engine.hpp"
#include "aucmi/roc_core.hpp"
#include "aucmi/sim_gen.hpp"

namespace aucmi::study {

/// Complete ignores R, Naive drops rows with R = 1, the MI arms impute D where R = 1.
enum class Arm { Complete, Naive, MiPmm, MiLogReg, MiNorm };

inline constexpr std::array<Arm, 5> kAllArms = {Arm::Complete, Arm::Naive, Arm::MiPmm,
                                                Arm::MiLogReg, Arm::MiNorm};

/// complete, naive, PMM, LR, NORM
std::string_view to_string(Arm arm);
Arm parse_arm(std::string_view s);

struct ReplicateResult {
  std::uint64_t scenario_id = 0;
  double theta = 0.0;
  double phi = 0.0;
  double rho = 0.0;
  std::size_t n = 0;
  std::uint64_t replicate = 0;
  Arm arm = Arm::Complete;
  roc::VarianceMethod ci_method = roc::VarianceMethod::Bamber;
  double point = 0.0;
  /// Variance as estimated; may be negative for Bamber and HM1 on small
  /// samples, in which case the interval was built from zero.
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double df = 0.0;
  bool valid = false;
  std::string failure_reason;
};

struct StudyOptions {
  std::vector<Arm> arms{kAllArms.begin(), kAllArms.end()};
  std::vector<roc::VarianceMethod> ci_methods{roc::kAllMethods.begin(), roc::kAllMethods.end()};
  mi::ImputationSpec imputation;  // method is overridden per MI arm
  double level = 0.95;
  std::size_t replicates = 1000;
  std::uint64_t master_seed = 0;
  int threads = 1;
  /// Redraws allowed when an imputation leaves fewer than two subjects in a class.
  int max_redraws = 10;
};

/// One dataset, every requested arm and CI method, in arm-major order.
/// Failures are recorded in the results rather than thrown.
std::vector<ReplicateResult> run_replicate(const sim::ScenarioConfig& scenario,
                                           std::uint64_t replicate, const StudyOptions& options);

using ResultSink = std::function<void(const ReplicateResult&)>;

/// All scenarios times options.replicates replicates, parallelised over
/// replicates with OpenMP. Output order is (scenario, replicate, arm, method)
/// whatever the thread count; the sink sees results in that order.
std::vector<ReplicateResult> run_study(const std::vector<sim::ScenarioConfig>& grid,
                                       const StudyOptions& options, const ResultSink& sink = {});

/// Plain loop with no threading, kept as the reference for run_study.
std::vector<ReplicateResult> run_study_serial(const std::vector<sim::ScenarioConfig>& grid,
                                              const StudyOptions& options,
                                              const ResultSink& sink = {});

struct EvalSummary {
  Arm arm = Arm::Complete;
  roc::VarianceMethod ci_method = roc::VarianceMethod::Bamber;
  double theta = 0.0;
  double phi = 0.0;
  double rho = 0.0;
  std::size_t n = 0;
  double cp = 0.0;
  double lncp = 0.0;
  double rncp = 0.0;
  double cil = 0.0;
  double mean_point = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  /// |cp - nominal| for one cell; mae_cp() averages it across cells.
  double mae_cp = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  bool empty() const { return n_valid == 0; }
};

/// Groups by (arm, method, theta, phi, rho, n); the scenario's theta is the truth.
/// Cells without a valid replicate are kept with n_valid = 0 and NaN metrics.
std::vector<EvalSummary> evaluate(std::span<const ReplicateResult> results,
                                  double nominal = 0.95);

/// sum |cp_i - nominal| / n_s
double mae_cp(std::span<const double> cps, double nominal = 0.95);

/// Average of a set of cells, as the published tables report them.
struct CellAverage {
  double cp = 0.0;
  double lncp = 0.0;
  double rncp = 0.0;
  double cil = 0.0;
  double mae = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  std::size_t cells = 0;
};

/// Averages the non-empty summaries matching arm, method and theta (and rho
/// when rho is finite) over the remaining keys.
CellAverage average_cells(std::span<const EvalSummary> summaries, Arm arm,
                          roc::VarianceMethod method, double theta, double rho,
                          double nominal = 0.95);

void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const ReplicateResult& r);
std::vector<ReplicateResult> read_results_csv(std::istream& in);

void write_summary_csv(std::ostream& out, std::span<const EvalSummary> summaries);

/// CP / MAE(CP) / CIL by theta, one row per (arm, method), 3 decimals.
std::string format_performance_table(std::span<const EvalSummary> summaries, double rho,
                                     double nominal = 0.95);
/// LNCP / RNCP by theta, one row per (arm, method), 3 decimals.
std::string format_noncoverage_table(std::span<const EvalSummary> summaries, double rho);
/// Bias and MSE of the point estimate by theta.
std::string format_mse_table(std::span<const EvalSummary> summaries, double rho);

}  // namespace aucmi::study

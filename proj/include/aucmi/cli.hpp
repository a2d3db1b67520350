#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aucmi/config.hpp"
#include "aucmi/study_runner.hpp"

namespace aucmi::cli {

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<int> threads;
  std::optional<std::string> out;
};

/// Defaults, then the config file (when given), then the overrides; validated.
config::RunConfig resolve_config(const std::optional<std::string>& path, const Overrides& o);

/// One line of calibration.csv.
struct CalibrationRow {
  std::string quantity;  // beta1, auc, prevalence or missing_rate
  double alpha0 = 0.0;
  double theta = 0.0;
  double gamma = 0.0, q1 = 0.0, q2 = 0.0;
  double target = 0.0;
  double published = 0.0;  // NaN when there is nothing to compare with
  double estimate = 0.0;
  double mc_se = 0.0;
  std::string status;
};

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows);
std::vector<CalibrationRow> read_calibration_csv(std::istream& in);

/// Re-derives beta1 per (alpha0, theta), prevalence per alpha0 and the missing
/// rate per (alpha0, theta, triple). Writes calibration.csv and run_manifest.txt.
std::vector<CalibrationRow> cmd_calibrate(const config::RunConfig& c, std::ostream& log);

/// Runs the grid and writes results.csv, summary.csv, tables/*.txt and run_manifest.txt.
std::vector<study::EvalSummary> cmd_simulate(const config::RunConfig& c, std::ostream& log);

struct AnalysisRow {
  std::string arm;
  roc::VarianceMethod ci_method = roc::VarianceMethod::Bamber;
  double point = 0.0, lower = 0.0, upper = 0.0, variance = 0.0, df = 0.0;
  int m = 0;
};

/// Naive and pooled MI intervals for the dataset in the [dataset] section.
/// Writes analysis.csv, tables/describe.txt, tables/analysis.txt and run_manifest.txt.
std::vector<AnalysisRow> cmd_analyze(const config::RunConfig& c, std::ostream& log);

/// Re-summarises an existing results.csv in the output directory.
std::vector<study::EvalSummary> cmd_report(const config::RunConfig& c, std::ostream& log);

/// Entry point; returns the process exit code (0 unless a fatal error occurred).
int run(int argc, char** argv);

}  // namespace aucmi::cli

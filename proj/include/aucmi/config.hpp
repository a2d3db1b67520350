#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aucmi/data_io.hpp"
#include "aucmi/mi_engine.hpp"
#include "aucmi/roc_core.hpp"
#include "aucmi/sim_gen.hpp"
#include "aucmi/study_runner.hpp"

namespace aucmi::config {

/// (gamma, q1, q2) with the missing-rate label it stands for.
struct MissingnessTriple {
  double gamma = 0.0;
  double q1 = 0.5;
  double q2 = 0.5;
  double rho = 0.0;
};

enum class Beta1Source { Published, Calibrated };

/// Everything a run needs. Defaults reproduce the reference grid:
/// 4 thetas x 2 alpha0 x 3 missingness triples x 3 sample sizes, m = 10,
/// 5 chained iterations, 1000 replicates.
struct RunConfig {
  // [run]
  std::uint64_t seed = 20240917;
  std::size_t replicates = 1000;
  int threads = 1;
  std::string out = "out";
  double level = 0.95;

  // [grid]
  std::vector<double> thetas{0.8, 0.9, 0.95, 0.99};
  std::vector<double> alpha0{0.0, 1.6111};
  std::vector<MissingnessTriple> missingness{
      {0.90, 0.85, 0.90, 0.5}, {0.95, 0.90, 0.95, 0.7}, {0.95, 0.99, 0.99, 0.9}};
  std::vector<std::size_t> sample_sizes{50, 100, 200};
  Beta1Source beta1 = Beta1Source::Published;
  std::size_t calibration_size = 1000000;
  std::uint64_t calibration_seed = 1;

  // [imputation]
  mi::ImputationSpec imputation;

  // [analysis]
  std::vector<study::Arm> arms{study::kAllArms.begin(), study::kAllArms.end()};
  std::vector<roc::VarianceMethod> ci_methods{roc::kAllMethods.begin(), roc::kAllMethods.end()};

  // [dataset], only for analyze
  std::optional<io::DatasetManifest> dataset;

  /// Throws std::invalid_argument describing the first bad value.
  void validate() const;
};

/// Reads the sectioned key = value format. Unknown sections or keys, duplicate
/// keys and unparseable values are errors naming the key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Fully resolved config in the same format; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& c);

/// The key = value schema, one line per accepted key with its default.
std::string schema();

/// Stable id of one grid cell, independent of which other cells are run.
std::uint64_t scenario_id(double theta, double alpha0, const MissingnessTriple& triple,
                          std::size_t n);

/// beta1 lookup for the grid: (alpha0, theta) -> beta1.
struct Beta1Entry {
  double alpha0 = 0.0;
  double theta = 0.0;
  double beta1 = 0.0;
};

/// Expands the grid into scenarios. Missingness thresholds are calibrated once
/// per (alpha0, theta, triple) from calibration_seed and shared across n.
/// beta1 comes from the published table unless `beta1_table` supplies it.
std::vector<sim::ScenarioConfig> build_scenarios(const RunConfig& c,
                                                 const std::vector<Beta1Entry>& beta1_table = {});

study::StudyOptions study_options(const RunConfig& c);

}  // namespace aucmi::config

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aucmi/cli.hpp"
#include "aucmi/config.hpp"

using namespace aucmi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("aucmi_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aucmi");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

const char* kSmallGrid =
    "[run]\nlevel = 0.95\n"
    "[grid]\nthetas = 0.8\nalpha0 = 0\nmissingness = 0.9:0.85:0.9:0.5\nsample_sizes = 50\n"
    "calibration_size = 100000\n"
    "[imputation]\nm = 2\niterations = 1\nburn_in = 2\n";

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("config rejects unknown keys and sections") {
  std::istringstream a("[run]\nseed = 3\nsede = 4\n");
  CHECK_THROWS_WITH_AS(config::parse_config(a), "unknown config key 'run.sede'", std::invalid_argument);
  std::istringstream b("[runn]\nseed = 3\n");
  CHECK_THROWS_WITH_AS(config::parse_config(b), "unknown config section [runn]", std::invalid_argument);
  std::istringstream c("seed = 3\n");
  CHECK_THROWS_AS(config::parse_config(c), std::invalid_argument);
  std::istringstream d("[run]\nseed = 3\nseed = 4\n");
  CHECK_THROWS_AS(config::parse_config(d), std::invalid_argument);
  std::istringstream e("[run]\nseed = -1\n");
  CHECK_THROWS_AS(config::parse_config(e), std::invalid_argument);
  std::istringstream f("[analysis]\narms = complete, bogus\n");
  CHECK_THROWS_AS(config::parse_config(f), std::invalid_argument);
}

TEST_CASE("config text round trip") {
  std::istringstream in(
      "[run]\nseed = 5\nthreads = 2\n[grid]\nthetas = 0.9, 0.99\nbeta1 = calibrated\n"
      "[imputation]\nrounding_mean = imputed_only\nlogreg_stabilizer = ridge\n"
      "[analysis]\narms = naive, NORM\nci_methods = DL\n"
      "[dataset]\npath = x.csv\ndelimiter = tab\nmissing_token = .\n"
      "columns = T:biomarker:continuous, D:disease:binary\n");
  const auto c = config::parse_config(in);
  CHECK(c.seed == 5);
  CHECK(c.thetas == std::vector<double>{0.9, 0.99});
  CHECK(c.beta1 == config::Beta1Source::Calibrated);
  CHECK(c.arms == std::vector<study::Arm>{study::Arm::Naive, study::Arm::MiNorm});
  REQUIRE(c.dataset);
  CHECK(c.dataset->delimiter == '\t');
  const auto text = config::to_text(c);
  std::istringstream again(text);
  CHECK(config::to_text(config::parse_config(again)) == text);
  std::istringstream defaults(config::to_text(config::RunConfig{}));
  CHECK(config::to_text(config::parse_config(defaults)) == config::to_text(config::RunConfig{}));
}

TEST_CASE("default grid") {
  const config::RunConfig c;
  CHECK(c.replicates == 1000);
  CHECK(c.imputation.m == 10);
  CHECK(c.imputation.iterations == 5);
  CHECK(c.imputation.donor_count == 5);
  CHECK(c.thetas.size() * c.alpha0.size() * c.missingness.size() * c.sample_sizes.size() == 72);
}

TEST_CASE("scenario ids are stable") {
  const config::MissingnessTriple t{0.9, 0.85, 0.9, 0.5};
  CHECK(config::scenario_id(0.8, 0.0, t, 50) == config::scenario_id(0.8, 0.0, t, 50));
  CHECK(config::scenario_id(0.8, 0.0, t, 50) != config::scenario_id(0.8, 0.0, t, 100));
  CHECK(config::scenario_id(0.8, 0.0, t, 50) != config::scenario_id(0.9, 0.0, t, 50));
}

TEST_CASE("overrides take precedence") {
  const auto dir = scratch("overrides");
  std::ofstream(dir / "c.ini") << "[run]\nseed = 1\nreplicates = 7\n";
  cli::Overrides o;
  o.seed = 42;
  o.out = (dir / "o").string();
  const auto c = cli::resolve_config((dir / "c.ini").string(), o);
  CHECK(c.seed == 42);
  CHECK(c.replicates == 7);
  CHECK(c.out == (dir / "o").string());
}

TEST_CASE("simulate is deterministic and thread-count independent") {
  const auto dir = scratch("simulate");
  std::ofstream(dir / "c.ini") << kSmallGrid;
  const auto cfg = (dir / "c.ini").string();
  REQUIRE(run_cli({"simulate", "--config", cfg, "--seed", "11", "--replicates", "3", "--threads", "1",
                   "--out", (dir / "a").string()}) == 0);
  REQUIRE(run_cli({"simulate", "--config", cfg, "--seed", "11", "--replicates", "3", "--threads", "2",
                   "--out", (dir / "b").string()}) == 0);
  REQUIRE(run_cli({"simulate", "--config", cfg, "--seed", "12", "--replicates", "3", "--out",
                   (dir / "c").string()}) == 0);
  const auto a = slurp(dir / "a" / "results.csv");
  CHECK(a == slurp(dir / "b" / "results.csv"));
  CHECK(a != slurp(dir / "c" / "results.csv"));
  CHECK(count_lines(a) == 1 + 3 * 5 * 5);
  CHECK(a.rfind("scenario_id,theta,phi,rho,n,replicate,arm,ci_method,point,lower,upper,variance,df,valid,failure_reason\n", 0) == 0);
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));
  CHECK(fs::exists(dir / "a" / "run_manifest.txt"));
  CHECK(fs::exists(dir / "a" / "tables" / "performance_rho0.5.txt"));

  // report re-derives the same summary from results.csv
  fs::remove(dir / "a" / "summary.csv");
  REQUIRE(run_cli({"report", "--config", cfg, "--out", (dir / "a").string()}) == 0);
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));
}

TEST_CASE("one replicate of the complete arm") {
  const auto dir = scratch("complete_only");
  std::ofstream(dir / "c.ini") << kSmallGrid << "[analysis]\narms = complete\n";
  REQUIRE(run_cli({"simulate", "--config", (dir / "c.ini").string(), "--replicates", "1", "--out",
                   (dir / "o").string()}) == 0);
  CHECK(count_lines(slurp(dir / "o" / "results.csv")) == 1 + 5);
}

TEST_CASE("calibrate writes its table") {
  const auto dir = scratch("calibrate");
  std::ofstream(dir / "c.ini") << kSmallGrid;
  REQUIRE(run_cli({"calibrate", "--config", (dir / "c.ini").string(), "--out", (dir / "o").string()}) == 0);
  std::ifstream in(dir / "o" / "calibration.csv");
  const auto rows = cli::read_calibration_csv(in);
  bool beta = false, rate = false;
  for (const auto& r : rows) {
    if (r.quantity == "beta1") {
      beta = true;
      CHECK(r.published == 0.8089);
      CHECK(r.estimate == doctest::Approx(0.8089).epsilon(0.05));
    }
    if (r.quantity == "missing_rate") {
      rate = true;
      CHECK(r.estimate > 0.3);
      CHECK(r.estimate < 0.7);
    }
  }
  CHECK(beta);
  CHECK(rate);
  std::ostringstream out;
  cli::write_calibration_csv(out, rows);
  CHECK(out.str() == slurp(dir / "o" / "calibration.csv"));
}

TEST_CASE("analyze a small dataset") {
  const auto dir = scratch("analyze");
  std::ofstream(dir / "d.csv") << "T,D,Z\n3,1,0.1\n5,1,0.4\n4,1,0.2\n1,0,-0.3\n4,0,0.0\n2,0,-0.1\n"
                                  "2.5,NA,0.3\n0.5,NA,-0.2\n";
  std::ofstream(dir / "c.ini") << "[imputation]\nm = 3\niterations = 2\nburn_in = 5\n"
                                  "[dataset]\npath = " << (dir / "d.csv").string()
                               << "\nmissing_token = NA\ncolumns = T:biomarker:continuous, "
                                  "D:disease:binary, Z:covariate:continuous\n";
  const auto c = cli::resolve_config((dir / "c.ini").string(), {std::nullopt, std::nullopt, std::nullopt,
                                                                 (dir / "o").string()});
  std::ostringstream log;
  const auto rows = cli::cmd_analyze(c, log);
  REQUIRE(rows.size() == 4 * 5);
  CHECK(rows[0].arm == "naive");
  CHECK(rows[0].point == doctest::Approx(7.5 / 9).epsilon(1e-12));
  CHECK(log.str().find("naive AUC 0.8333") != std::string::npos);
  CHECK(fs::exists(dir / "o" / "analysis.csv"));
  CHECK(fs::exists(dir / "o" / "tables" / "describe.txt"));
}

TEST_CASE("analyze without missing outcomes agrees across arms") {
  const auto dir = scratch("analyze_complete");
  std::ofstream(dir / "d.csv") << "T,D\n3,1\n5,1\n4,1\n1,0\n4,0\n2,0\n";
  std::ofstream(dir / "c.ini") << "[imputation]\nm = 3\n[dataset]\npath = " << (dir / "d.csv").string()
                               << "\ncolumns = T:biomarker:continuous, D:disease:binary\n";
  const auto c = cli::resolve_config((dir / "c.ini").string(), {std::nullopt, std::nullopt, std::nullopt,
                                                                 (dir / "o").string()});
  std::ostringstream log;
  const auto rows = cli::cmd_analyze(c, log);
  for (std::size_t k = 5; k < rows.size(); ++k) {
    const auto& naive = rows[k % 5];
    CHECK(rows[k].point == naive.point);
    CHECK(rows[k].lower == doctest::Approx(naive.lower).epsilon(1e-12));
    CHECK(rows[k].upper == doctest::Approx(naive.upper).epsilon(1e-12));
  }
}

TEST_CASE("analyze refuses a single observed class") {
  const auto dir = scratch("analyze_degenerate");
  std::ofstream(dir / "d.csv") << "T,D\n3,1\n5,1\n4,NA\n";
  std::ofstream(dir / "c.ini") << "[dataset]\npath = " << (dir / "d.csv").string()
                               << "\nmissing_token = NA\ncolumns = T:biomarker:continuous, D:disease:binary\n";
  const auto c = cli::resolve_config((dir / "c.ini").string(), {std::nullopt, std::nullopt, std::nullopt,
                                                                 (dir / "o").string()});
  std::ostringstream log;
  CHECK_THROWS_WITH_AS(cli::cmd_analyze(c, log), "degenerate outcome column", std::invalid_argument);
  CHECK(run_cli({"analyze", "--config", (dir / "c.ini").string(), "--out", (dir / "o").string()}) == 1);
}

TEST_CASE("bad command lines fail") {
  CHECK(run_cli({"simulate", "--config", "/nonexistent.ini"}) == 1);
  CHECK(run_cli({"simulate", "--replicates", "0", "--out", scratch("bad").string()}) != 0);
  CHECK(run_cli({"simulate", "--bogus"}) != 0);
}

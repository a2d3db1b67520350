#include "aucmi/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "aucmi/data_io.hpp"
#include "aucmi/mi_engine.hpp"

namespace aucmi::cli {
namespace {

namespace fs = std::filesystem;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_num(const std::string& s) {
  if (s == "NA") return kNaN;
  if (s == "Inf") return std::numeric_limits<double>::infinity();
  if (s == "-Inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad number in calibration file: '" + s + "'");
  return v;
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void check_written(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

std::uint64_t key(double v) { return static_cast<std::uint64_t>(std::llround(v * 1e6)); }

void write_manifest(const config::RunConfig& c, const std::string& command,
                    const std::string& derived) {
  const fs::path p = fs::path(c.out) / "run_manifest.txt";
  auto out = open_out(p);
  out << "# aucmi " << command << "\n"
      << "# Resolved configuration. Re-run with: aucmi " << command << " --config <this file>\n\n"
      << config::to_text(c);
  if (!derived.empty()) out << "\n# Derived values\n" << derived;
  check_written(out, p);
}

std::string scenario_lines(const std::vector<sim::ScenarioConfig>& grid, std::uint64_t seed) {
  std::ostringstream o;
  o << "# replicate streams: Philox4x32-10, key = seed " << seed
    << ", stream id = mix(scenario_id, replicate)\n";
  for (const auto& s : grid) {
    o << "# scenario " << s.id << " theta=" << num(s.target_theta) << " phi=" << num(s.target_phi)
      << " rho=" << num(s.rho_label) << " n=" << s.n << " alpha0=" << num(s.params.alpha0)
      << " beta1=" << num(s.params.beta1) << " gamma=" << num(s.missing.gamma)
      << " t_threshold=" << num(s.missing.t_threshold) << " z_thresholds=";
    for (Eigen::Index k = 0; k < s.missing.z_thresholds.size(); ++k)
      o << (k ? ":" : "") << num(s.missing.z_thresholds[k]);
    o << '\n';
  }
  return o.str();
}

void write_summaries(const config::RunConfig& c, const std::vector<study::EvalSummary>& summaries) {
  const fs::path dir(c.out);
  {
    const auto p = dir / "summary.csv";
    auto out = open_out(p);
    study::write_summary_csv(out, summaries);
    check_written(out, p);
  }
  std::set<double> rhos;
  for (const auto& s : summaries) rhos.insert(s.rho);
  for (double rho : rhos) {
    const std::string tag = "rho" + num(rho);
    const std::string label = " (rho = " + num(rho) + ", averaged over prevalence and sample size)\n";
    auto write = [&](const std::string& name, const std::string& title, const std::string& body) {
      const auto p = dir / "tables" / (name + "_" + tag + ".txt");
      auto out = open_out(p);
      out << title << label << body;
      check_written(out, p);
    };
    write("performance", "CP, MAE of CP and CIL", study::format_performance_table(summaries, rho, c.level));
    write("noncoverage", "Left and right non-coverage", study::format_noncoverage_table(summaries, rho));
    write("mse", "Bias and MSE of the point estimate", study::format_mse_table(summaries, rho));
  }
}

double mean_disease(const sim::GenerativeParams& params, std::size_t size, RandomStream& rng,
                    double* se) {
  const auto z = sim::gen_covariates(size, params, rng);
  const auto d = sim::gen_disease(z, params.alpha0, params.alpha1, rng);
  double s = 0.0;
  for (double v : d) s += v;
  const double p = s / static_cast<double>(size);
  *se = std::sqrt(p * (1.0 - p) / static_cast<double>(size));
  return p;
}

std::vector<config::Beta1Entry> calibrated_beta1(const config::RunConfig& c, std::ostream& log) {
  const fs::path p = fs::path(c.out) / "calibration.csv";
  std::vector<CalibrationRow> rows;
  if (fs::exists(p)) {
    std::ifstream in(p);
    rows = read_calibration_csv(in);
    log << "using beta1 from " << p.string() << '\n';
  } else {
    log << "no calibration.csv in " << c.out << "; calibrating first\n";
    rows = cmd_calibrate(c, log);
  }
  std::vector<config::Beta1Entry> table;
  for (const auto& r : rows)
    if (r.quantity == "beta1" && std::isfinite(r.estimate)) table.push_back({r.alpha0, r.theta, r.estimate});
  return table;
}

}  // namespace

config::RunConfig resolve_config(const std::optional<std::string>& path, const Overrides& o) {
  config::RunConfig c = path ? config::load_config(*path) : config::RunConfig{};
  if (o.seed) c.seed = *o.seed;
  if (o.replicates) c.replicates = *o.replicates;
  if (o.threads) c.threads = *o.threads;
  if (o.out) c.out = *o.out;
  c.validate();
  return c;
}

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows) {
  out << "quantity,alpha0,theta,gamma,q1,q2,target,published,estimate,mc_se,status\n";
  for (const auto& r : rows)
    out << r.quantity << ',' << num(r.alpha0) << ',' << num(r.theta) << ',' << num(r.gamma) << ','
        << num(r.q1) << ',' << num(r.q2) << ',' << num(r.target) << ',' << num(r.published) << ','
        << num(r.estimate) << ',' << num(r.mc_se) << ',' << r.status << '\n';
}

std::vector<CalibrationRow> read_calibration_csv(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != "quantity,alpha0,theta,gamma,q1,q2,target,published,estimate,mc_se,status")
    throw std::invalid_argument("calibration file has an unexpected header");
  std::vector<CalibrationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw std::invalid_argument("calibration line with " + std::to_string(f.size()) + " fields");
    CalibrationRow r;
    r.quantity = f[0];
    r.alpha0 = parse_num(f[1]);
    r.theta = parse_num(f[2]);
    r.gamma = parse_num(f[3]);
    r.q1 = parse_num(f[4]);
    r.q2 = parse_num(f[5]);
    r.target = parse_num(f[6]);
    r.published = parse_num(f[7]);
    r.estimate = parse_num(f[8]);
    r.mc_se = parse_num(f[9]);
    r.status = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CalibrationRow> cmd_calibrate(const config::RunConfig& c, std::ostream& log) {
  c.validate();
  std::vector<CalibrationRow> rows;
  std::vector<config::Beta1Entry> betas;

  for (double a : c.alpha0) {
    sim::GenerativeParams params(a, 0.0);
    CalibrationRow prev{"prevalence", a, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, 0.0, 0.0, "ok"};
    try {
      prev.target = sim::prevalence_for_alpha0(a);
      prev.published = prev.target;
    } catch (const std::out_of_range&) {
    }
    RandomStream rng(c.calibration_seed, {2, key(a)});
    prev.estimate = mean_disease(params, c.calibration_size, rng, &prev.mc_se);
    if (std::isfinite(prev.target) && std::abs(prev.estimate - prev.target) > 0.005) prev.status = "off-target";
    rows.push_back(prev);
    log << "prevalence alpha0=" << num(a) << ": " << prev.estimate << '\n';

    for (double t : c.thetas) {
      CalibrationRow row{"beta1", a, t, kNaN, kNaN, kNaN, t, kNaN, kNaN, kNaN, "ok"};
      try {
        row.published = sim::published_beta1(a, t);
      } catch (const std::out_of_range&) {
      }
      try {
        RandomStream pool_rng(c.calibration_seed, {1, key(a), key(t)});
        row.estimate = sim::calibrate_beta1(params, t, c.calibration_size, pool_rng);
        if (std::isfinite(row.published) && std::abs(row.estimate - row.published) > 0.02)
          row.status = "off-published";
      } catch (const std::exception& e) {
        row.status = "bracket failure";
        rows.push_back(row);
        log << "beta1 alpha0=" << num(a) << " theta=" << num(t) << ": " << e.what() << '\n';
        continue;
      }
      rows.push_back(row);
      betas.push_back({a, t, row.estimate});
      log << "beta1 alpha0=" << num(a) << " theta=" << num(t) << ": " << row.estimate << '\n';

      sim::GenerativeParams fitted(a, row.estimate);
      RandomStream auc_rng(c.calibration_seed, {3, key(a), key(t)});
      const auto auc = sim::population_auc(fitted, c.calibration_size, auc_rng);
      rows.push_back({"auc", a, t, kNaN, kNaN, kNaN, t, kNaN, auc.value, auc.std_error,
                      std::abs(auc.value - t) < 0.002 ? "ok" : "off-target"});
    }
  }

  // Missing rates under the beta1 each simulation would use.
  config::RunConfig sim_config = c;
  const auto grid = config::build_scenarios(
      sim_config, c.beta1 == config::Beta1Source::Calibrated ? betas : std::vector<config::Beta1Entry>{});
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>> seen;
  for (const auto& s : grid) {
    const auto k = std::make_tuple(key(s.params.alpha0), key(s.target_theta), key(s.missing.gamma),
                                   key(s.missing.q1), key(s.missing.q2));
    if (!seen.insert(k).second) continue;
    RandomStream rng(c.calibration_seed,
                     {4, std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), std::get<4>(k)});
    const auto rate = sim::missing_rate(s.params, s.missing, c.calibration_size, rng);
    rows.push_back({"missing_rate", s.params.alpha0, s.target_theta, s.missing.gamma, s.missing.q1,
                    s.missing.q2, s.rho_label, kNaN, rate.value, rate.std_error,
                    std::abs(rate.value - s.rho_label) <= 0.03 ? "ok" : "off-target"});
    log << "missing rate alpha0=" << num(s.params.alpha0) << " theta=" << num(s.target_theta)
        << " (" << num(s.missing.gamma) << "," << num(s.missing.q1) << "," << num(s.missing.q2)
        << "): " << rate.value << '\n';
  }

  const fs::path p = fs::path(c.out) / "calibration.csv";
  auto out = open_out(p);
  write_calibration_csv(out, rows);
  check_written(out, p);
  write_manifest(c, "calibrate", scenario_lines(grid, c.seed));
  return rows;
}

std::vector<study::EvalSummary> cmd_simulate(const config::RunConfig& c, std::ostream& log) {
  c.validate();
  const auto betas = c.beta1 == config::Beta1Source::Calibrated ? calibrated_beta1(c, log)
                                                                : std::vector<config::Beta1Entry>{};
  const auto grid = config::build_scenarios(c, betas);
  write_manifest(c, "simulate", scenario_lines(grid, c.seed));

  const fs::path p = fs::path(c.out) / "results.csv";
  auto out = open_out(p);
  study::write_results_header(out);
  std::size_t done = 0;
  const std::size_t per_replicate = c.arms.size() * c.ci_methods.size();
  const std::size_t total = grid.size() * c.replicates * per_replicate;
  const auto results = study::run_study(grid, config::study_options(c), [&](const study::ReplicateResult& r) {
    study::write_result_row(out, r);
    if (!out) throw std::runtime_error("write failed: " + p.string());
    if (++done % (per_replicate * 1000) == 0) log << done << " / " << total << " results\n";
  });
  check_written(out, p);

  const auto summaries = study::evaluate(results, c.level);
  write_summaries(c, summaries);
  log << "wrote " << results.size() << " results and " << summaries.size() << " summary cells to "
      << c.out << '\n';
  return summaries;
}

std::vector<AnalysisRow> cmd_analyze(const config::RunConfig& c, std::ostream& log) {
  c.validate();
  if (!c.dataset) throw std::invalid_argument("analyze needs a [dataset] section in the config");
  const StudyDataset data = io::load_dataset(*c.dataset);
  const auto summary = io::describe(data);

  std::size_t ones = 0, zeros = 0;
  const auto& d = data.disease();
  for (std::size_t i = 0; i < data.rows(); ++i)
    if (!d.is_missing(i)) (d.values[i] == 1.0 ? ones : zeros) += 1;
  if (ones == 0 || zeros == 0) throw std::invalid_argument("degenerate outcome column");

  std::vector<AnalysisRow> rows;
  const auto naive = roc::placements(data.verified_subset().scores());
  for (auto method : c.ci_methods) {
    const double var = roc::variance(method, naive);
    const auto ci = roc::wald_ci(naive.theta, std::max(var, 0.0), c.level);
    rows.push_back({"naive", method, naive.theta, ci.lower, ci.upper, var, ci.df, 1});
  }

  for (auto arm : {study::Arm::MiPmm, study::Arm::MiLogReg, study::Arm::MiNorm}) {
    if (std::find(c.arms.begin(), c.arms.end(), arm) == c.arms.end()) continue;
    mi::ImputationSpec spec = c.imputation;
    spec.method = arm == study::Arm::MiPmm ? mi::ImputeMethod::Pmm
                  : arm == study::Arm::MiLogReg ? mi::ImputeMethod::LogReg
                                                : mi::ImputeMethod::NormDa;
    spec.rng_seed = c.seed;
    RandomStream rng(c.seed, {5, static_cast<std::uint64_t>(arm)});
    const auto completed = mi::impute(data, spec, rng);
    std::vector<double> thetas;
    std::vector<std::array<double, 5>> vars;
    for (const auto& ds : completed) {
      const auto table = roc::placements(ds.scores());
      thetas.push_back(table.theta);
      vars.push_back(roc::all_variances(table));
    }
    for (auto method : c.ci_methods) {
      std::vector<double> v;
      for (const auto& row : vars) v.push_back(std::max(row[static_cast<std::size_t>(method)], 0.0));
      const auto pooled = mi::pool(thetas, v, c.level);
      rows.push_back({std::string(study::to_string(arm)), method, pooled.theta_bar, pooled.ci.lower,
                      pooled.ci.upper, pooled.total_v, pooled.nu, spec.m});
    }
  }

  const fs::path dir(c.out);
  {
    const auto p = dir / "analysis.csv";
    auto out = open_out(p);
    out << "arm,ci_method,point,lower,upper,variance,df,m\n";
    for (const auto& r : rows)
      out << r.arm << ',' << roc::to_string(r.ci_method) << ',' << num(r.point) << ',' << num(r.lower)
          << ',' << num(r.upper) << ',' << num(r.variance) << ',' << num(r.df) << ',' << r.m << '\n';
    check_written(out, p);
  }
  {
    const auto p = dir / "tables" / "describe.txt";
    auto out = open_out(p);
    out << "rows: " << data.rows() << '\n' << io::format_description(summary);
    check_written(out, p);
  }
  {
    const auto p = dir / "tables" / "analysis.txt";
    auto out = open_out(p);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %-4s %8s %8s %8s\n", "arm", "CI", "AUC", "lower", "upper");
    out << buf;
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%-8s %-4s %8.4f %8.4f %8.4f\n", r.arm.c_str(),
                    std::string(roc::to_string(r.ci_method)).c_str(), r.point, r.lower, r.upper);
      out << buf;
    }
    check_written(out, p);
  }
  write_manifest(c, "analyze", "");
  log << "naive AUC " << std::fixed << std::setprecision(4) << naive.theta << " from "
      << naive.nx + naive.ny << " verified rows\n";
  log.unsetf(std::ios::floatfield);
  return rows;
}

std::vector<study::EvalSummary> cmd_report(const config::RunConfig& c, std::ostream& log) {
  const fs::path p = fs::path(c.out) / "results.csv";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string() + "; run simulate first");
  const auto results = study::read_results_csv(in);
  const auto summaries = study::evaluate(results, c.level);
  write_summaries(c, summaries);
  log << "summarised " << results.size() << " results into " << summaries.size() << " cells\n";
  return summaries;
}

int run(int argc, char** argv) {
  CLI::App app{"Wald-type AUC confidence intervals under multiple imputation"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config file (sectioned key = value)");
    sub->add_option("--seed", o.seed, "Master seed (u64)");
    sub->add_option("--replicates", o.replicates, "Replicates per scenario")->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory");
  };
  auto* calibrate = app.add_subcommand("calibrate", "Re-derive beta1, prevalence and missing rates");
  auto* simulate = app.add_subcommand("simulate", "Run the simulation grid");
  auto* analyze = app.add_subcommand("analyze", "Naive and MI intervals for a dataset");
  auto* report = app.add_subcommand("report", "Summarise an existing results.csv");
  auto* schema = app.add_subcommand("schema", "Print the config schema with defaults");
  for (auto* sub : {calibrate, simulate, analyze, report}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (schema->parsed()) {
      std::cout << config::schema();
      return 0;
    }
    const auto c = resolve_config(config_path, o);
    if (calibrate->parsed()) cmd_calibrate(c, std::cerr);
    else if (simulate->parsed()) cmd_simulate(c, std::cerr);
    else if (analyze->parsed()) {
      const auto rows = cmd_analyze(c, std::cerr);
      for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-8s %-4s %.4f [%.4f, %.4f]\n", r.arm.c_str(),
                      std::string(roc::to_string(r.ci_method)).c_str(), r.point, r.lower, r.upper);
        std::cout << buf;
      }
    } else if (report->parsed()) cmd_report(c, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace aucmi::cli

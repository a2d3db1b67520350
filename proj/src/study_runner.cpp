#include "aucmi/study_runner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>

#include <omp.h>

namespace aucmi::study {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

mi::ImputeMethod impute_method(Arm arm) {
  switch (arm) {
    case Arm::MiPmm: return mi::ImputeMethod::Pmm;
    case Arm::MiLogReg: return mi::ImputeMethod::LogReg;
    case Arm::MiNorm: return mi::ImputeMethod::NormDa;
    default: throw std::logic_error("not an imputation arm");
  }
}

ReplicateResult blank(const sim::ScenarioConfig& sc, std::uint64_t replicate, Arm arm,
                      roc::VarianceMethod method) {
  ReplicateResult r;
  r.scenario_id = sc.id;
  r.theta = sc.target_theta;
  r.phi = sc.target_phi;
  r.rho = sc.rho_label;
  r.n = sc.n;
  r.replicate = replicate;
  r.arm = arm;
  r.ci_method = method;
  r.point = r.variance = r.lower = r.upper = r.df = kNaN;
  return r;
}

void fail_all(std::vector<ReplicateResult>& out, const sim::ScenarioConfig& sc,
              std::uint64_t replicate, Arm arm, const StudyOptions& opt, const std::string& why) {
  for (auto method : opt.ci_methods) {
    auto r = blank(sc, replicate, arm, method);
    r.failure_reason = why;
    out.push_back(std::move(r));
  }
}

bool usable(const roc::GroupedScores& g) { return g.nx() >= 2 && g.ny() >= 2; }

// Scores split by disease status, optionally restricted to verified rows.
roc::GroupedScores split_scores(const sim::SimulatedSample& s, bool verified_only) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (verified_only && s.r[i]) continue;
    (s.d[i] == 1.0 ? y : x).push_back(s.t[i]);
  }
  return roc::GroupedScores(std::move(x), std::move(y));
}

void single_dataset_arm(std::vector<ReplicateResult>& out, const sim::ScenarioConfig& sc,
                        std::uint64_t replicate, Arm arm, const StudyOptions& opt,
                        const sim::SimulatedSample& sample) {
  const bool naive = arm == Arm::Naive;
  std::size_t nx = 0, ny = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (naive && sample.r[i]) continue;
    (sample.d[i] == 1.0 ? ny : nx) += 1;
  }
  if (nx < 2 || ny < 2) {
    fail_all(out, sc, replicate, arm, opt, "insufficient group size");
    return;
  }
  const auto table = roc::placements(split_scores(sample, naive));
  for (auto method : opt.ci_methods) {
    auto r = blank(sc, replicate, arm, method);
    r.point = table.theta;
    r.variance = roc::variance(method, table);
    const auto ci = roc::wald_ci(table.theta, std::max(r.variance, 0.0), opt.level);
    r.lower = ci.lower;
    r.upper = ci.upper;
    r.df = ci.df;
    r.valid = true;
    out.push_back(std::move(r));
  }
}

void imputation_arm(std::vector<ReplicateResult>& out, const sim::ScenarioConfig& sc,
                    std::uint64_t replicate, Arm arm, const StudyOptions& opt,
                    const StudyDataset& observed, const RandomStream& rng) {
  mi::ImputationSpec spec = opt.imputation;
  spec.method = impute_method(arm);
  const std::size_t m = static_cast<std::size_t>(spec.m);
  std::vector<double> thetas(m);
  std::vector<std::array<double, 5>> vars(m);
  try {
    auto imputer = mi::make_imputer(observed, spec, rng);
    for (std::size_t k = 0; k < m; ++k) {
      int attempts = 0;
      for (;;) {
        const StudyDataset completed = imputer->next();
        const auto g = completed.scores();
        if (usable(g)) {
          const auto table = roc::placements(g);
          thetas[k] = table.theta;
          vars[k] = roc::all_variances(table);
          break;
        }
        if (++attempts > opt.max_redraws) {
          fail_all(out, sc, replicate, arm, opt, "single-class imputation");
          return;
        }
      }
    }
  } catch (const std::exception& e) {
    fail_all(out, sc, replicate, arm, opt, e.what());
    return;
  }
  std::vector<double> v(m);
  for (auto method : opt.ci_methods) {
    const auto idx = static_cast<std::size_t>(method);
    for (std::size_t k = 0; k < m; ++k) v[k] = std::max(vars[k][idx], 0.0);
    const auto pooled = mi::pool(thetas, v, opt.level);
    auto r = blank(sc, replicate, arm, method);
    r.point = pooled.theta_bar;
    r.variance = pooled.total_v;
    r.lower = pooled.ci.lower;
    r.upper = pooled.ci.upper;
    r.df = pooled.nu;
    r.valid = true;
    out.push_back(std::move(r));
  }
}

struct WorkItem {
  std::size_t scenario;
  std::uint64_t replicate;
};

std::vector<WorkItem> work_items(const std::vector<sim::ScenarioConfig>& grid, std::size_t reps) {
  std::vector<WorkItem> items;
  items.reserve(grid.size() * reps);
  for (std::size_t s = 0; s < grid.size(); ++s)
    for (std::uint64_t r = 0; r < reps; ++r) items.push_back({s, r});
  return items;
}

void emit(std::vector<ReplicateResult>& all, std::vector<ReplicateResult>&& part,
          const ResultSink& sink) {
  for (auto& r : part) {
    if (sink) sink(r);
    all.push_back(std::move(r));
  }
}

}  // namespace

std::string_view to_string(Arm arm) {
  switch (arm) {
    case Arm::Complete: return "complete";
    case Arm::Naive: return "naive";
    case Arm::MiPmm: return "PMM";
    case Arm::MiLogReg: return "LR";
    case Arm::MiNorm: return "NORM";
  }
  return "?";
}

Arm parse_arm(std::string_view s) {
  for (auto a : kAllArms)
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown arm: " + std::string(s));
}

std::vector<ReplicateResult> run_replicate(const sim::ScenarioConfig& scenario,
                                           std::uint64_t replicate, const StudyOptions& opt) {
  const RandomStream base(opt.master_seed, {scenario.id, replicate});
  RandomStream data_rng = base.derive({0});
  const auto sample = sim::generate(scenario.n, scenario.params, scenario.missing, data_rng);

  std::vector<ReplicateResult> out;
  out.reserve(opt.arms.size() * opt.ci_methods.size());
  std::optional<StudyDataset> observed;
  for (auto arm : opt.arms) {
    if (arm == Arm::Complete || arm == Arm::Naive) {
      single_dataset_arm(out, scenario, replicate, arm, opt, sample);
      continue;
    }
    if (!observed) observed = sample.observed_dataset();
    imputation_arm(out, scenario, replicate, arm, opt, *observed,
                   base.derive({1 + static_cast<std::uint64_t>(arm)}));
  }
  return out;
}

std::vector<ReplicateResult> run_study(const std::vector<sim::ScenarioConfig>& grid,
                                       const StudyOptions& options, const ResultSink& sink) {
  options.imputation.validate();
  const auto items = work_items(grid, options.replicates);
  const int threads = std::max(1, options.threads);
  const std::size_t chunk = 64 * static_cast<std::size_t>(threads);

  std::vector<ReplicateResult> all;
  all.reserve(items.size() * options.arms.size() * options.ci_methods.size());
  std::vector<std::vector<ReplicateResult>> slots;
  std::vector<std::exception_ptr> errors;
  for (std::size_t begin = 0; begin < items.size(); begin += chunk) {
    const std::size_t count = std::min(chunk, items.size() - begin);
    slots.assign(count, {});
    errors.assign(count, nullptr);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& item = items[begin + static_cast<std::size_t>(i)];
      try {
        slots[i] = run_replicate(grid[item.scenario], item.replicate, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      emit(all, std::move(slots[i]), sink);
    }
  }
  return all;
}

std::vector<ReplicateResult> run_study_serial(const std::vector<sim::ScenarioConfig>& grid,
                                              const StudyOptions& options,
                                              const ResultSink& sink) {
  options.imputation.validate();
  std::vector<ReplicateResult> all;
  for (const auto& item : work_items(grid, options.replicates))
    emit(all, run_replicate(grid[item.scenario], item.replicate, options), sink);
  return all;
}

std::vector<EvalSummary> evaluate(std::span<const ReplicateResult> results, double nominal) {
  using Key = std::tuple<int, int, double, double, double, std::size_t>;
  struct Acc {
    std::size_t valid = 0, invalid = 0, covered = 0, left = 0, right = 0;
    double cil = 0.0, point = 0.0, sq = 0.0;
  };
  std::map<Key, Acc> cells;
  for (const auto& r : results) {
    auto& a = cells[{static_cast<int>(r.arm), static_cast<int>(r.ci_method), r.theta, r.phi,
                     r.rho, r.n}];
    if (!r.valid) {
      ++a.invalid;
      continue;
    }
    ++a.valid;
    if (r.upper < r.theta)
      ++a.left;
    else if (r.lower > r.theta)
      ++a.right;
    else
      ++a.covered;
    a.cil += std::min(r.upper, 1.0) - std::max(r.lower, 0.0);
    a.point += r.point;
    a.sq += (r.point - r.theta) * (r.point - r.theta);
  }

  std::vector<EvalSummary> out;
  out.reserve(cells.size());
  for (const auto& [key, a] : cells) {
    EvalSummary s;
    s.arm = static_cast<Arm>(std::get<0>(key));
    s.ci_method = static_cast<roc::VarianceMethod>(std::get<1>(key));
    s.theta = std::get<2>(key);
    s.phi = std::get<3>(key);
    s.rho = std::get<4>(key);
    s.n = std::get<5>(key);
    s.n_valid = a.valid;
    s.n_invalid = a.invalid;
    if (a.valid == 0) {
      s.cp = s.lncp = s.rncp = s.cil = s.mean_point = s.bias = s.mse = s.mae_cp = kNaN;
    } else {
      const double v = static_cast<double>(a.valid);
      s.cp = a.covered / v;
      s.lncp = a.left / v;
      s.rncp = a.right / v;
      s.cil = a.cil / v;
      s.mean_point = a.point / v;
      s.bias = s.mean_point - s.theta;
      s.mse = a.sq / v;
      s.mae_cp = std::abs(s.cp - nominal);
    }
    out.push_back(s);
  }
  return out;
}

double mae_cp(std::span<const double> cps, double nominal) {
  if (cps.empty()) throw std::invalid_argument("mae_cp needs at least one setting");
  double sum = 0.0;
  for (double cp : cps) sum += std::abs(cp - nominal);
  return sum / static_cast<double>(cps.size());
}

CellAverage average_cells(std::span<const EvalSummary> summaries, Arm arm,
                          roc::VarianceMethod method, double theta, double rho, double nominal) {
  CellAverage avg;
  std::vector<double> cps;
  for (const auto& s : summaries) {
    if (s.empty() || s.arm != arm || s.ci_method != method) continue;
    if (std::abs(s.theta - theta) > 1e-12) continue;
    if (std::isfinite(rho) && std::abs(s.rho - rho) > 1e-12) continue;
    cps.push_back(s.cp);
    avg.cp += s.cp;
    avg.lncp += s.lncp;
    avg.rncp += s.rncp;
    avg.cil += s.cil;
    avg.bias += s.bias;
    avg.mse += s.mse;
    ++avg.cells;
  }
  if (avg.cells == 0) {
    avg.cp = avg.lncp = avg.rncp = avg.cil = avg.mae = avg.bias = avg.mse = kNaN;
    return avg;
  }
  const double c = static_cast<double>(avg.cells);
  avg.cp /= c;
  avg.lncp /= c;
  avg.rncp /= c;
  avg.cil /= c;
  avg.bias /= c;
  avg.mse /= c;
  avg.mae = mae_cp(cps, nominal);
  return avg;
}

}  // namespace aucmi::study

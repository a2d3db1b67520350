#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aucmi/study_runner.hpp"

namespace aucmi::study {
namespace {

// Shortest text that parses back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_num(const std::string& s) {
  if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (s == "Inf") return std::numeric_limits<double>::infinity();
  if (s == "-Inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad number in results file: '" + s + "'");
  return v;
}

template <class T>
T parse_int(const std::string& s) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad integer in results file: '" + s + "'");
  return v;
}

// Reasons are free text; keep the CSV one-field-per-comma.
std::string sanitize(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

// Paper style: three decimals, no leading zero.
std::string fmt3(double v) {
  if (!std::isfinite(v)) return "  NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  else if (s.rfind("-0.", 0) == 0) s.erase(1, 1);
  return s;
}

std::vector<double> thetas_of(std::span<const EvalSummary> summaries, double rho) {
  std::set<double> t;
  for (const auto& s : summaries)
    if (!std::isfinite(rho) || std::abs(s.rho - rho) < 1e-12) t.insert(s.theta);
  return {t.begin(), t.end()};
}

std::vector<Arm> arms_of(std::span<const EvalSummary> summaries) {
  std::vector<Arm> out;
  for (auto a : kAllArms)
    for (const auto& s : summaries)
      if (s.arm == a) {
        out.push_back(a);
        break;
      }
  return out;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

std::string left(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

using Metric = double (*)(const CellAverage&);

std::string table(std::span<const EvalSummary> summaries, double rho, double nominal,
                  const std::vector<std::pair<std::string, Metric>>& blocks) {
  const auto thetas = thetas_of(summaries, rho);
  std::ostringstream out;
  out << left("arm", 10) << left("CI", 5);
  for (const auto& [name, _] : blocks) {
    out << " |";
    for (double t : thetas) out << pad(name + "@" + fmt3(t), 10);
  }
  out << '\n';
  for (auto arm : arms_of(summaries)) {
    for (auto method : roc::kAllMethods) {
      std::vector<CellAverage> cells;
      bool any = false;
      for (double t : thetas) {
        cells.push_back(average_cells(summaries, arm, method, t, rho, nominal));
        any = any || cells.back().cells > 0;
      }
      if (!any) continue;
      out << left(std::string(to_string(arm)), 10) << left(std::string(roc::to_string(method)), 5);
      for (const auto& [_, metric] : blocks) {
        out << " |";
        for (const auto& c : cells) out << pad(fmt3(metric(c)), 10);
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace

void write_results_header(std::ostream& out) {
  out << "scenario_id,theta,phi,rho,n,replicate,arm,ci_method,point,lower,upper,variance,df,"
         "valid,failure_reason\n";
}

void write_result_row(std::ostream& out, const ReplicateResult& r) {
  out << r.scenario_id << ',' << num(r.theta) << ',' << num(r.phi) << ',' << num(r.rho) << ','
      << r.n << ',' << r.replicate << ',' << to_string(r.arm) << ','
      << roc::to_string(r.ci_method) << ',' << num(r.point) << ',' << num(r.lower) << ','
      << num(r.upper) << ',' << num(r.variance) << ',' << num(r.df) << ','
      << (r.valid ? 1 : 0) << ',' << sanitize(r.failure_reason) << '\n';
}

std::vector<ReplicateResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("results file is empty");
  std::ostringstream expect;
  write_results_header(expect);
  if (line + '\n' != expect.str()) throw std::invalid_argument("results file has an unexpected header");
  std::vector<ReplicateResult> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 15)
      throw std::invalid_argument("results line " + std::to_string(lineno) + ": expected 15 fields");
    ReplicateResult r;
    r.scenario_id = parse_int<std::uint64_t>(f[0]);
    r.theta = parse_num(f[1]);
    r.phi = parse_num(f[2]);
    r.rho = parse_num(f[3]);
    r.n = parse_int<std::size_t>(f[4]);
    r.replicate = parse_int<std::uint64_t>(f[5]);
    r.arm = parse_arm(f[6]);
    r.ci_method = roc::parse_variance_method(f[7]);
    r.point = parse_num(f[8]);
    r.lower = parse_num(f[9]);
    r.upper = parse_num(f[10]);
    r.variance = parse_num(f[11]);
    r.df = parse_num(f[12]);
    r.valid = f[13] == "1";
    r.failure_reason = f[14];
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const EvalSummary> summaries) {
  out << "arm,ci_method,theta,phi,rho,n,cp,lncp,rncp,cil,bias,mse,n_valid,n_invalid\n";
  for (const auto& s : summaries)
    out << to_string(s.arm) << ',' << roc::to_string(s.ci_method) << ',' << num(s.theta) << ','
        << num(s.phi) << ',' << num(s.rho) << ',' << s.n << ',' << num(s.cp) << ','
        << num(s.lncp) << ',' << num(s.rncp) << ',' << num(s.cil) << ',' << num(s.bias) << ','
        << num(s.mse) << ',' << s.n_valid << ',' << s.n_invalid << '\n';
}

std::string format_performance_table(std::span<const EvalSummary> summaries, double rho,
                                     double nominal) {
  return table(summaries, rho, nominal,
               {{"CP", [](const CellAverage& c) { return c.cp; }},
                {"MAE", [](const CellAverage& c) { return c.mae; }},
                {"CIL", [](const CellAverage& c) { return c.cil; }}});
}

std::string format_noncoverage_table(std::span<const EvalSummary> summaries, double rho) {
  return table(summaries, rho, 0.95,
               {{"LNCP", [](const CellAverage& c) { return c.lncp; }},
                {"RNCP", [](const CellAverage& c) { return c.rncp; }}});
}

std::string format_mse_table(std::span<const EvalSummary> summaries, double rho) {
  return table(summaries, rho, 0.95,
               {{"bias", [](const CellAverage& c) { return c.bias; }},
                {"MSE", [](const CellAverage& c) { return c.mse; }}});
}

}  // namespace aucmi::study

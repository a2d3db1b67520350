#include "aucmi/roc_core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aucmi::roc {
namespace {

void require_variance_sizes(std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("insufficient group size");
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double sum_sq(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0, [](double a, double b) { return a + b * b; });
}

// Shared skeleton of the revised Hanley-McNeil estimator.
double hanley_mcneil(double theta, double tie_fraction, double q1, double q2, std::size_t nx,
                     std::size_t ny) {
  const double dx = static_cast<double>(nx) - 1.0;
  const double dy = static_cast<double>(ny) - 1.0;
  const double t2 = theta * theta;
  return (theta * (1.0 - theta) - 0.25 * tie_fraction + dy * (q1 - t2) + dx * (q2 - t2)) /
         (dx * dy);
}

}  // namespace

GroupedScores::GroupedScores(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty() || y_.empty()) throw std::invalid_argument("empty group");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x_.begin(), x_.end(), finite) || !std::all_of(y_.begin(), y_.end(), finite))
    throw std::invalid_argument("non-finite score");
}

double PlacementTable::tie_fraction() const {
  return sum(tie_row) / (static_cast<double>(nx) * static_cast<double>(ny));
}

std::string_view to_string(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::Bamber: return "Bm";
    case VarianceMethod::HanleyMcNeil1: return "HM1";
    case VarianceMethod::HanleyMcNeil2: return "HM2";
    case VarianceMethod::NewcombeWald: return "NW";
    case VarianceMethod::DeLong: return "DL";
  }
  return "?";
}

VarianceMethod parse_variance_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "bm" || s == "bamber") return VarianceMethod::Bamber;
  if (s == "hm1" || s == "hanleymcneil1") return VarianceMethod::HanleyMcNeil1;
  if (s == "hm2" || s == "hanleymcneil2") return VarianceMethod::HanleyMcNeil2;
  if (s == "nw" || s == "newcombe" || s == "newcombewald") return VarianceMethod::NewcombeWald;
  if (s == "dl" || s == "delong") return VarianceMethod::DeLong;
  throw std::invalid_argument("unknown variance method: " + std::string(name));
}

double auc_hat(const GroupedScores& scores) { return placements(scores).theta; }

PlacementTable placements(const GroupedScores& scores) {
  PlacementTable p;
  p.nx = scores.nx();
  p.ny = scores.ny();
  std::vector<double> xs(scores.x().begin(), scores.x().end());
  std::vector<double> ys(scores.y().begin(), scores.y().end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  p.v_row.resize(p.ny);
  p.u_row.resize(p.ny);
  p.tie_row.resize(p.ny);
  for (std::size_t i = 0; i < p.ny; ++i) {
    const double y = scores.y()[i];
    const auto [lo, hi] = std::equal_range(xs.begin(), xs.end(), y);
    const auto below = static_cast<double>(lo - xs.begin());
    const auto ties = static_cast<double>(hi - lo);
    p.v_row[i] = below + 0.5 * ties;
    p.u_row[i] = static_cast<double>(p.nx) - p.v_row[i];
    p.tie_row[i] = ties;
  }

  p.v_col.resize(p.nx);
  p.u_col.resize(p.nx);
  p.tie_col.resize(p.nx);
  for (std::size_t j = 0; j < p.nx; ++j) {
    const double x = scores.x()[j];
    const auto [lo, hi] = std::equal_range(ys.begin(), ys.end(), x);
    const auto above = static_cast<double>(ys.end() - hi);
    const auto ties = static_cast<double>(hi - lo);
    p.v_col[j] = above + 0.5 * ties;
    p.u_col[j] = static_cast<double>(p.ny) - p.v_col[j];
    p.tie_col[j] = ties;
  }

  p.theta = sum(p.v_row) / (static_cast<double>(p.nx) * static_cast<double>(p.ny));
  return p;
}

PlacementTable placements_reference(const GroupedScores& scores) {
  PlacementTable p;
  p.nx = scores.nx();
  p.ny = scores.ny();
  p.v_row.assign(p.ny, 0.0);
  p.tie_row.assign(p.ny, 0.0);
  p.v_col.assign(p.nx, 0.0);
  p.tie_col.assign(p.nx, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < p.ny; ++i) {
    for (std::size_t j = 0; j < p.nx; ++j) {
      const double h = kernel(scores.y()[i], scores.x()[j]);
      p.v_row[i] += h;
      p.v_col[j] += h;
      total += h;
      if (scores.y()[i] == scores.x()[j]) {
        p.tie_row[i] += 1.0;
        p.tie_col[j] += 1.0;
      }
    }
  }
  p.u_row.resize(p.ny);
  p.u_col.resize(p.nx);
  for (std::size_t i = 0; i < p.ny; ++i) p.u_row[i] = static_cast<double>(p.nx) - p.v_row[i];
  for (std::size_t j = 0; j < p.nx; ++j) p.u_col[j] = static_cast<double>(p.ny) - p.v_col[j];
  p.theta = total / (static_cast<double>(p.nx) * static_cast<double>(p.ny));
  return p;
}

// The b terms count ordered pairs of distinct opposite-group subjects falling
// strictly on the same or on opposite sides, which is what B_XXY and B_YYX
// define. With ties present, strict counts are v - tie/2 and u - tie/2; on
// tie-free data they coincide with v and u.
double var_bamber(const PlacementTable& p) {
  require_variance_sizes(p.nx, p.ny);
  const double nx = static_cast<double>(p.nx);
  const double ny = static_cast<double>(p.ny);

  auto concordance = [](const std::vector<double>& v, const std::vector<double>& u,
                        const std::vector<double>& ties) {
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double below = v[k] - 0.5 * ties[k];
      const double above = u[k] - 0.5 * ties[k];
      acc += below * (below - 1.0) + above * (above - 1.0) - 2.0 * below * above;
    }
    return acc;
  };

  const double b_xxy = concordance(p.v_row, p.u_row, p.tie_row) / (nx * (nx - 1.0) * ny);
  const double b_yyx = concordance(p.v_col, p.u_col, p.tie_col) / (ny * (ny - 1.0) * nx);
  const double p_ne = 1.0 - p.tie_fraction();
  const double c = p.theta - 0.5;
  return (p_ne + (nx - 1.0) * b_xxy + (ny - 1.0) * b_yyx - 4.0 * (nx + ny - 1.0) * c * c) /
         (4.0 * (nx - 1.0) * (ny - 1.0));
}

double var_hm1(const PlacementTable& p) {
  require_variance_sizes(p.nx, p.ny);
  const double nx = static_cast<double>(p.nx);
  const double ny = static_cast<double>(p.ny);
  const double q1 = sum_sq(p.v_col) / (nx * ny * ny);
  const double q2 = sum_sq(p.v_row) / (nx * nx * ny);
  return hanley_mcneil(p.theta, p.tie_fraction(), q1, q2, p.nx, p.ny);
}

double var_hm2(const PlacementTable& p) {
  require_variance_sizes(p.nx, p.ny);
  const double t = p.theta;
  const double q1 = t / (2.0 - t);
  const double q2 = 2.0 * t * t / (1.0 + t);
  return hanley_mcneil(t, p.tie_fraction(), q1, q2, p.nx, p.ny);
}

double var_newcombe(double theta_hat, std::size_t nx, std::size_t ny) {
  require_variance_sizes(nx, ny);
  const double t = theta_hat;
  const double n_avg = 0.5 * static_cast<double>(nx + ny);
  const double bracket = 2.0 * n_avg - 1.0 - (3.0 * n_avg - 3.0) / ((2.0 - t) * (1.0 + t));
  return t * (1.0 - t) / ((static_cast<double>(nx) - 1.0) * (static_cast<double>(ny) - 1.0)) *
         bracket;
}

double var_delong(const PlacementTable& p) {
  require_variance_sizes(p.nx, p.ny);
  const double nx = static_cast<double>(p.nx);
  const double ny = static_cast<double>(p.ny);
  double s10 = 0.0;
  for (double v : p.v_col) s10 += (v / ny - p.theta) * (v / ny - p.theta);
  double s01 = 0.0;
  for (double v : p.v_row) s01 += (v / nx - p.theta) * (v / nx - p.theta);
  s10 /= nx - 1.0;
  s01 /= ny - 1.0;
  return s10 / nx + s01 / ny;
}

double var_bamber(const GroupedScores& s) { return var_bamber(placements(s)); }
double var_hm1(const GroupedScores& s) { return var_hm1(placements(s)); }
double var_hm2(const GroupedScores& s) { return var_hm2(placements(s)); }
double var_delong(const GroupedScores& s) { return var_delong(placements(s)); }

double variance(VarianceMethod method, const PlacementTable& p) {
  switch (method) {
    case VarianceMethod::Bamber: return var_bamber(p);
    case VarianceMethod::HanleyMcNeil1: return var_hm1(p);
    case VarianceMethod::HanleyMcNeil2: return var_hm2(p);
    case VarianceMethod::NewcombeWald: return var_newcombe(p.theta, p.nx, p.ny);
    case VarianceMethod::DeLong: return var_delong(p);
  }
  throw std::logic_error("unhandled variance method");
}

std::array<double, 5> all_variances(const PlacementTable& p) {
  std::array<double, 5> out{};
  for (std::size_t k = 0; k < kAllMethods.size(); ++k) out[k] = variance(kAllMethods[k], p);
  return out;
}

ConfidenceInterval wald_ci(double theta_hat, double var, double level, double df) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0,1)");
  if (!(var >= 0.0)) throw std::invalid_argument("variance must be non-negative");
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  const double p = 1.0 - 0.5 * (1.0 - level);
  const double q = std::isinf(df) ? stats::normal_quantile(p) : stats::t_quantile(p, df);
  const double half = q * std::sqrt(var);
  return ConfidenceInterval{theta_hat, var, theta_hat - half, theta_hat + half, level, df};
}

}  // namespace aucmi::roc

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "aucmi/quantiles.hpp"

namespace aucmi::roc {

/// Biomarker scores split by disease status: x non-diseased, y diseased.
class GroupedScores {
 public:
  /// Throws std::invalid_argument("empty group") or on non-finite scores.
  GroupedScores(std::vector<double> x, std::vector<double> y);

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::size_t nx() const noexcept { return x_.size(); }
  std::size_t ny() const noexcept { return y_.size(); }

  GroupedScores swapped() const { return GroupedScores(y_, x_); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Row/column placement sums of the Mann-Whitney kernel.
///
/// v_row[i] = sum_j H(y_i, x_j), v_col[j] = sum_i H(y_i, x_j),
/// u_row = n_x - v_row, u_col = n_y - v_col. tie_row/tie_col count exact ties,
/// which lets the strict-inequality counts be recovered as v - tie/2.
struct PlacementTable {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double theta = 0.0;
  std::vector<double> v_row, u_row, tie_row;
  std::vector<double> v_col, u_col, tie_col;

  double tie_fraction() const;
};

enum class VarianceMethod { Bamber, HanleyMcNeil1, HanleyMcNeil2, NewcombeWald, DeLong };

inline constexpr std::array<VarianceMethod, 5> kAllMethods{
    VarianceMethod::Bamber, VarianceMethod::HanleyMcNeil1, VarianceMethod::HanleyMcNeil2,
    VarianceMethod::NewcombeWald, VarianceMethod::DeLong};

std::string_view to_string(VarianceMethod m);
/// Accepts the short labels (bm, hm1, hm2, nw, dl) and the long names.
VarianceMethod parse_variance_method(std::string_view name);

struct ConfidenceInterval {
  double point = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  double df = stats::kInfiniteDf;
};

/// Mann-Whitney kernel: 1 if y > x, 1/2 on exact equality, else 0.
constexpr double kernel(double y, double x) noexcept {
  return y > x ? 1.0 : (y == x ? 0.5 : 0.0);
}

double auc_hat(const GroupedScores& scores);

/// O((n_x + n_y) log(n_x + n_y)) via sorted copies and binary search.
PlacementTable placements(const GroupedScores& scores);
/// O(n_x n_y) double loop over the kernel; reference for testing.
PlacementTable placements_reference(const GroupedScores& scores);

// Variance estimators. All require n_x >= 2 and n_y >= 2 and throw
// std::invalid_argument("insufficient group size") otherwise. Bamber and HM1
// may return negative values on tiny samples; callers clamp before building CIs.
double var_bamber(const PlacementTable& p);
double var_hm1(const PlacementTable& p);
double var_hm2(const PlacementTable& p);
double var_newcombe(double theta_hat, std::size_t nx, std::size_t ny);
double var_delong(const PlacementTable& p);

double var_bamber(const GroupedScores& s);
double var_hm1(const GroupedScores& s);
double var_hm2(const GroupedScores& s);
double var_delong(const GroupedScores& s);

double variance(VarianceMethod method, const PlacementTable& p);
/// All five estimators in kAllMethods order, sharing one placement pass.
std::array<double, 5> all_variances(const PlacementTable& p);

/// Symmetric Wald interval theta +- q * sqrt(variance). q is the normal
/// quantile for infinite df and the Student-t quantile otherwise. No truncation.
ConfidenceInterval wald_ci(double theta_hat, double variance, double level = 0.95,
                           double df = stats::kInfiniteDf);

}  // namespace aucmi::roc

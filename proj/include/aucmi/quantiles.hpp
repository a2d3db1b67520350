#pragma once

#include <limits>

namespace aucmi::stats {

inline constexpr double kInfiniteDf = std::numeric_limits<double>::infinity();

double normal_cdf(double x);
/// Inverse standard normal CDF; p in (0,1).
double normal_quantile(double p);
/// Inverse Student-t CDF at real-valued df > 0; df = infinity gives the normal quantile.
double t_quantile(double p, double df);

}  // namespace aucmi::stats

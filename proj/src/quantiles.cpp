#include "aucmi/quantiles.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace aucmi::stats {

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("t_quantile: p must lie in (0,1)");
  if (std::isinf(df)) return normal_quantile(p);
  if (!(df > 0.0)) throw std::domain_error("t_quantile: df must be positive");
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

}  // namespace aucmi::stats

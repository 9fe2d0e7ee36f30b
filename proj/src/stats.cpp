#include "subrct/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "subrct/errors.hpp"

namespace subrct::stats {

namespace {
constexpr double kNormalFallbackDf = 1000.0;
}

double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<>(), x);
}

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw DomainError("normal_quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<>(), p);
}

double t_cdf(double x, double df) {
  if (df <= 0.0) throw DomainError("t_cdf needs df > 0");
  if (df > kNormalFallbackDf) return normal_cdf(x);
  return boost::math::cdf(boost::math::students_t_distribution<>(df), x);
}

double t_quantile(double p, double df) {
  if (df <= 0.0) throw DomainError("t_quantile needs df > 0");
  if (p <= 0.0 || p >= 1.0) throw DomainError("t_quantile needs p in (0, 1)");
  if (df > kNormalFallbackDf) return normal_quantile(p);
  return boost::math::quantile(boost::math::students_t_distribution<>(df), p);
}

double chi_squared_cdf(double x, double df) {
  if (df <= 0.0) throw DomainError("chi_squared_cdf needs df > 0");
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::chi_squared_distribution<>(df), x);
}

double f_cdf(double x, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0) throw DomainError("f_cdf needs positive df");
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::fisher_f_distribution<>(df1, df2), x);
}

}  // namespace subrct::stats

#include "subrct/inference.hpp"

#include <cmath>
#include <limits>

#include "subrct/errors.hpp"
#include "subrct/stats.hpp"

namespace subrct {

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::T: return "t";
    case TestKind::Z: return "z";
    case TestKind::F: return "F";
    case TestKind::ChiSq: return "chi_squared";
  }
  return "?";
}

SubgroupTest subgroup_test(double estimate, double se, double df,
                           double null_value, double alpha) {
  if (se < 0.0) throw DomainError("negative standard error");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const bool z = std::isinf(df);
  if (!z && df <= 0.0) throw DomainError("nonpositive degrees of freedom");

  SubgroupTest out;
  out.estimate = estimate;
  out.se = se;
  out.alpha = alpha;
  out.test.kind = z ? TestKind::Z : TestKind::T;
  out.test.df1 = df;

  if (se == 0.0) {
    out.test.degenerate = true;
    const bool at_null = estimate == null_value;
    out.test.statistic = at_null ? 0.0 : std::numeric_limits<double>::infinity();
    out.test.p_value = at_null ? 1.0 : 0.0;
    out.ci_lo = out.ci_hi = estimate;
    return out;
  }

  const double t = (estimate - null_value) / se;
  out.test.statistic = t;
  const double tail =
      z ? stats::normal_cdf(-std::fabs(t)) : stats::t_cdf(-std::fabs(t), df);
  out.test.p_value = 2.0 * tail;
  const double q = z ? stats::normal_quantile(1.0 - alpha / 2.0)
                     : stats::t_quantile(1.0 - alpha / 2.0, df);
  out.ci_lo = estimate - q * se;
  out.ci_hi = estimate + q * se;
  return out;
}

EqualEffectsTest equal_effects_test(const std::vector<double>& estimates,
                                    const std::vector<double>& ses,
                                    const std::vector<double>& dfs) {
  const size_t k = estimates.size();
  if (k < 2) throw DomainError("equal-effects test needs at least two groups");
  if (ses.size() != k || dfs.size() != k)
    throw DomainError("equal-effects inputs must have matching lengths");

  double wsum = 0.0, wmean = 0.0, df_sum = 0.0;
  for (size_t i = 0; i < k; ++i) {
    if (ses[i] <= 0.0) throw DomainError("equal-effects test needs positive SEs");
    const double w = 1.0 / (ses[i] * ses[i]);
    wsum += w;
    wmean += w * estimates[i];
    df_sum += dfs[i];
  }
  wmean /= wsum;

  double stat = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const double w = 1.0 / (ses[i] * ses[i]);
    const double d = estimates[i] - wmean;
    stat += w * d * d;
  }

  EqualEffectsTest out;
  out.statistic = stat;
  out.k = static_cast<int>(k);
  const double df1 = static_cast<double>(k - 1);

  out.chi_squared.kind = TestKind::ChiSq;
  out.chi_squared.statistic = stat;
  out.chi_squared.df1 = df1;
  out.chi_squared.p_value = 1.0 - stats::chi_squared_cdf(stat, df1);

  out.f.kind = TestKind::F;
  out.f.statistic = stat / df1;
  out.f.df1 = df1;
  out.f.df2 = df_sum;
  if (df_sum <= 0.0) throw DomainError("equal-effects F needs positive summed df");
  out.f.p_value = 1.0 - stats::f_cdf(out.f.statistic, df1, df_sum);
  return out;
}

}  // namespace subrct

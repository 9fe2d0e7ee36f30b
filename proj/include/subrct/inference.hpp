#pragma once

#include <string>
#include <vector>

namespace subrct {

enum class TestKind { T, Z, F, ChiSq };

std::string to_string(TestKind kind);

struct TestResult {
  TestKind kind = TestKind::T;
  double statistic = 0.0;
  double df1 = 0.0;  // the only df for T/ChiSq
  double df2 = 0.0;  // denominator df, F only
  double p_value = 1.0;
  bool degenerate = false;  // se collapsed to zero
};

struct SubgroupTest {
  TestResult test;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double alpha = 0.05;
};

// Two-sided t (or z when df is infinite) test of estimate against
// null_value, with the matching central confidence interval so the interval
// contains null_value exactly when p > alpha.
SubgroupTest subgroup_test(double estimate, double se, double df,
                           double null_value = 0.0, double alpha = 0.05);

struct EqualEffectsTest {
  double statistic = 0.0;  // Wald quadratic form
  int k = 0;
  TestResult chi_squared;  // statistic ~ chi-squared(k - 1)
  TestResult f;            // statistic / (k - 1) ~ F(k - 1, sum of df)
};

// Wald test of equal effects across groups, treating the estimates as
// independent with variances se^2. The F form divides by k - 1 and uses the
// summed group df as the denominator df.
EqualEffectsTest equal_effects_test(const std::vector<double>& estimates,
                                    const std::vector<double>& ses,
                                    const std::vector<double>& dfs);

}  // namespace subrct

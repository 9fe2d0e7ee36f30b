#pragma once

#include <cstdint>
#include <vector>

namespace subrct {

// Allocation law for a baseline subgroup under complete randomization:
// n1 of n units are treated, the subgroup has n_k members, and the treated
// subgroup count follows a hypergeometric distribution on
// {max(0, n_k - (n - n1)), ..., min(n_k, n1)}.
struct AllocationLaw {
  long long n = 0;
  long long n1 = 0;
  long long n_k = 0;

  long long n0() const { return n - n1; }
  long long support_lo() const;
  long long support_hi() const;
};

namespace design_math {

// Exact log pmf of the treated subgroup count at x, via log-gamma sums, so
// the law stays usable at n in the millions.
double log_pmf(const AllocationLaw& law, long long x);
double pmf(const AllocationLaw& law, long long x);

// P(both subgroup arms are non-empty). Computed as one minus the boundary
// mass so a law whose support excludes the boundary returns exactly 1.
double split_probability(const AllocationLaw& law);

// P(|pi_k^arm - pi_k| / pi_k <= c) where pi_k^arm is the subgroup share of
// the given arm and pi_k = n_k / n its population share.
double relative_deviation_probability(const AllocationLaw& law, int arm, double c);

// Small-sample variance inflation factor (n_k - 1) / (n_k - pi_k).
double phi_correction(long long n_k, double pi_k);

// E(1 / arm count) over the law truncated to both arms non-empty and
// renormalized. By Jensen this is at least 1 / E(arm count).
double expected_inverse_arm_size(const AllocationLaw& law, int arm);

// Ratio of the subgroup standard error evaluated at the realized arm sizes
// (n_k * p + delta1 treated) to the one evaluated at expected sizes, for unit
// control-arm variance, treatment/control variance ratio phi_var, and
// normalized effect-heterogeneity variance theta_het. Real-valued sizes are
// allowed so the ratio can be traced as a curve in delta1.
double se_ratio_actual_vs_expected(double n_k, double p, double delta1,
                                   double phi_var, double theta_het);

struct CurvePoint {
  double x = 0.0;
  double value = 0.0;
};

// Grid evaluations backing the probe command.
std::vector<CurvePoint> relative_deviation_curve(const AllocationLaw& law, int arm,
                                                 const std::vector<double>& c_grid);
std::vector<CurvePoint> se_ratio_curve(double n_k, double p,
                                       const std::vector<double>& delta_grid,
                                       double phi_var, double theta_het);

}  // namespace design_math
}  // namespace subrct

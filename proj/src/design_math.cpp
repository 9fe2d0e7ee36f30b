#include "subrct/design_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "subrct/errors.hpp"

namespace subrct {

namespace {

double log_choose(long long n, long long k) {
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

void check_law(const AllocationLaw& law) {
  if (law.n < 2) throw DomainError("allocation law needs n >= 2");
  if (law.n1 < 1 || law.n1 > law.n - 1)
    throw DomainError("allocation law needs 1 <= n1 <= n - 1");
  if (law.n_k < 1 || law.n_k > law.n)
    throw DomainError("allocation law needs 1 <= n_k <= n");
}

void check_arm(int arm) {
  if (arm != 0 && arm != 1) throw DomainError("arm must be 0 or 1");
}

}  // namespace

long long AllocationLaw::support_lo() const { return std::max(0LL, n_k - (n - n1)); }
long long AllocationLaw::support_hi() const { return std::min(n_k, n1); }

namespace design_math {

double log_pmf(const AllocationLaw& law, long long x) {
  check_law(law);
  if (x < law.support_lo() || x > law.support_hi())
    throw DomainError("pmf evaluated outside the law's support");
  return log_choose(law.n_k, x) + log_choose(law.n - law.n_k, law.n1 - x) -
         log_choose(law.n, law.n1);
}

double pmf(const AllocationLaw& law, long long x) {
  return std::exp(log_pmf(law, x));
}

double split_probability(const AllocationLaw& law) {
  check_law(law);
  double boundary = 0.0;
  if (law.support_lo() == 0) boundary += pmf(law, 0);
  if (law.support_hi() == law.n_k) boundary += pmf(law, law.n_k);
  return std::clamp(1.0 - boundary, 0.0, 1.0);
}

double relative_deviation_probability(const AllocationLaw& law, int arm, double c) {
  check_law(law);
  check_arm(arm);
  if (c < 0.0) throw DomainError("relative deviation bound c must be >= 0");
  const double pi_k = static_cast<double>(law.n_k) / static_cast<double>(law.n);
  const double arm_total = static_cast<double>(arm == 1 ? law.n1 : law.n0());
  double total = 0.0;
  for (long long x = law.support_lo(); x <= law.support_hi(); ++x) {
    const double count = static_cast<double>(arm == 1 ? x : law.n_k - x);
    const double share = count / arm_total;
    if (std::abs(share - pi_k) <= c * pi_k) total += pmf(law, x);
  }
  return std::min(total, 1.0);
}

double phi_correction(long long n_k, double pi_k) {
  if (n_k < 2) throw DomainError("phi correction needs n_k >= 2");
  if (pi_k <= 0.0 || pi_k > 1.0) throw DomainError("phi correction needs pi_k in (0, 1]");
  return (static_cast<double>(n_k) - 1.0) / (static_cast<double>(n_k) - pi_k);
}

double expected_inverse_arm_size(const AllocationLaw& law, int arm) {
  check_law(law);
  check_arm(arm);
  if (law.n_k < 2)
    throw DomainError("expected inverse arm size needs n_k >= 2");
  const long long lo = std::max(law.support_lo(), 1LL);
  const long long hi = std::min(law.support_hi(), law.n_k - 1);
  if (lo > hi)
    throw DomainError("allocation law has no split with both arms non-empty");
  double mass = 0.0;
  double accum = 0.0;
  for (long long x = lo; x <= hi; ++x) {
    const double p = pmf(law, x);
    const double count = static_cast<double>(arm == 1 ? x : law.n_k - x);
    mass += p;
    accum += p / count;
  }
  return accum / mass;
}

double se_ratio_actual_vs_expected(double n_k, double p, double delta1,
                                   double phi_var, double theta_het) {
  if (n_k < 2.0) throw DomainError("se ratio needs n_k >= 2");
  if (p <= 0.0 || p >= 1.0) throw DomainError("se ratio needs p in (0, 1)");
  if (phi_var <= 0.0) throw DomainError("se ratio needs phi_var > 0");
  if (theta_het < 0.0) throw DomainError("se ratio needs theta_het >= 0");
  const double a1 = n_k * p + delta1;
  const double a0 = n_k - a1;
  if (a1 < 1.0 || a0 < 1.0)
    throw DomainError("se ratio needs both realized arm sizes >= 1");
  const double het = theta_het / n_k;
  const double actual = phi_var / a1 + 1.0 / a0 - het;
  const double expected = phi_var / (n_k * p) + 1.0 / (n_k * (1.0 - p)) - het;
  if (actual <= 0.0 || expected <= 0.0)
    throw DomainError("se ratio variances must be positive; lower theta_het");
  return std::sqrt(actual / expected);
}

std::vector<CurvePoint> relative_deviation_curve(const AllocationLaw& law, int arm,
                                                 const std::vector<double>& c_grid) {
  std::vector<CurvePoint> out;
  out.reserve(c_grid.size());
  for (double c : c_grid)
    out.push_back({c, relative_deviation_probability(law, arm, c)});
  return out;
}

std::vector<CurvePoint> se_ratio_curve(double n_k, double p,
                                       const std::vector<double>& delta_grid,
                                       double phi_var, double theta_het) {
  std::vector<CurvePoint> out;
  out.reserve(delta_grid.size());
  for (double d : delta_grid)
    out.push_back({d, se_ratio_actual_vs_expected(n_k, p, d, phi_var, theta_het)});
  return out;
}

}  // namespace design_math
}  // namespace subrct

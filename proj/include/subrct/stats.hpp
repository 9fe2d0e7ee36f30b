#pragma once

namespace subrct::stats {

// Distribution helpers used by the inference layer. df arguments are real
// valued (Bell-McCaffrey corrections produce fractional df). Student t calls
// fall back to the normal for df > 1000, where the two agree to ~1e-4 and the
// t evaluation buys nothing.
double normal_cdf(double x);
double normal_quantile(double p);
double t_cdf(double x, double df);
double t_quantile(double p, double df);
double chi_squared_cdf(double x, double df);
double f_cdf(double x, double df1, double df2);

}  // namespace subrct::stats

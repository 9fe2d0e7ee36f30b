#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "subrct/estimators.hpp"

namespace subrct {

enum class SizeBasis { Actual, Expected };
enum class DfRule { DesignBased, BellMcCaffrey, Normal };

struct VarianceOptions {
  SizeBasis basis = SizeBasis::Actual;
  bool phi_adjust = false;           // subtract the arm share instead of 1
  bool heterogeneity_bound = false;  // subtract the effect-variation lower bound
  bool r2_adjust = false;            // compensate effect-column collinearity
  DfRule df_rule = DfRule::DesignBased;
};

struct VarResult {
  double variance = 0.0;
  double df = std::numeric_limits<double>::infinity();
  bool clamped = false;  // heterogeneity bound pushed the variance below zero
  std::vector<std::string> notes;

  double se() const { return std::sqrt(variance); }
};

// Subgroup variance from the arm-specific residual spreads of an unblocked
// fit, with expected or realized arm sizes in the denominators.
VarResult var_design_based(const FittedModel& model, int subgroup,
                           const VarianceOptions& opts);

// Full-design sandwich variance of the subgroup effect column.
VarResult var_huber_white(const FittedModel& model, int subgroup);

// Variance averaging 1/(arm size) over the assignment law truncated to
// splits that keep both arms populated; dominates the expected-size formula.
VarResult var_finite_sample(const FittedModel& model, int subgroup,
                            const VarianceOptions& opts);

// Same, with the expected inverse arm sizes precomputed by the caller (they
// depend only on the design counts, so simulation loops hoist them).
VarResult var_finite_sample(const FittedModel& model, int subgroup,
                            const VarianceOptions& opts, double e_inv1,
                            double e_inv0);

struct BlockVariance {
  int block = -1;
  double variance = 0.0;
};

struct BlockedVarianceResult {
  std::vector<BlockVariance> per_block;
  VarResult pooled;
};

// Block-size weighted pooling of block-level variances for one subgroup.
BlockedVarianceResult var_blocked(const FittedModel& model, int subgroup,
                                  const VarianceOptions& opts);

// Between-cluster variance of the subgroup effect for individual-level
// subgroups; falls back to the random-cluster-count form when some clusters
// miss the subgroup.
VarResult var_cluster_design_based(const ClusteredResult& res, int subgroup,
                                   const VarianceOptions& opts);

// Cluster-robust sandwich with small-sample scaling.
VarResult var_crse(const ClusteredResult& res, int subgroup);

// Variance for subgroups formed of whole clusters, treating the number of
// subgroup clusters per arm as random.
VarResult var_cluster_level_subgroup(const ClusteredResult& res, int subgroup,
                                     const VarianceOptions& opts);

// Weighted respondent variance with response-rate scaled denominators.
VarResult var_nonresponse(const NonresponseResult& res, int subgroup,
                          const VarianceOptions& opts);

// Welch-style df for the two-arm comparison; equals 2(m - 1) for balanced
// covariate-free arms of size m.
double bell_mccaffrey_df(double n1, double n0, int v, double p, double pi1,
                         double pi0);

}  // namespace subrct

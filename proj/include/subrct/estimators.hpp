#pragma once

#include <string>
#include <vector>

#include "subrct/data_model.hpp"
#include "subrct/linear_fit.hpp"

namespace subrct {

struct FittedModel {
  DesignData design;
  FitResult fit;
};

FittedModel fit_model(const TrialFrame& frame, const ModelSpec& spec);

struct SubgroupEstimate {
  int subgroup = -1;
  std::string label;
  std::string kind;
  double tau_hat = 0.0;
  long n_k = 0;
  long n_k1 = 0;
  long n_k0 = 0;
  double pi_k = 0.0;
};

// Plain within-subgroup difference of arm means over the estimation sample.
SubgroupEstimate diff_in_means(const TrialFrame& frame, int subgroup);

// Per-subgroup effects extracted from an unblocked fitted model.
std::vector<SubgroupEstimate> subgroup_estimates(const TrialFrame& frame,
                                                 const FittedModel& model,
                                                 const std::string& kind);

struct BlockEstimate {
  int block = -1;
  int subgroup = -1;
  double tau_hat = 0.0;
  long n_bk = 0;
  long n_bk1 = 0;
  long n_bk0 = 0;
};

struct BlockedEstimates {
  std::vector<BlockEstimate> per_block;
  std::vector<SubgroupEstimate> pooled;             // block-size weighted
  std::vector<std::pair<int, int>> excluded_cells;  // (block, subgroup)
};

// Block-by-block effects from a blocked fitted model, pooled with block
// subgroup sizes as weights. Blocks whose (block, subgroup) cell misses an
// arm are excluded and reported.
BlockedEstimates blocked_estimates(const TrialFrame& frame, const FittedModel& model);

// Precision-weighted pooling of the same block effects, weights
// n_bk * p_bk * (1 - p_bk) with p_bk the realized block treated share.
// Point estimator only; it targets a precision-weighted estimand and no
// design variance is defined for it here.
std::vector<SubgroupEstimate> blocked_restricted(const TrialFrame& frame,
                                                 const FittedModel& model);

// Cluster-level bookkeeping for the clustered variance estimators.
struct ClusterCell {
  int cluster = -1;
  int subgroup = -1;
  int t = 0;
  long n_jk = 0;          // member count
  double weight = 0.0;    // n_jk, or 1 under equal-cluster weighting
  double resid_mean = 0.0;
};

struct ClusterStats {
  std::vector<ClusterCell> cells;
  long m = 0, m1 = 0, m0 = 0;          // cluster counts overall and by arm
  std::vector<long> m_k, m_k1, m_k0;   // clusters containing subgroup k
  std::vector<double> wbar_k;          // mean cell weight over all m clusters
};

struct ClusteredResult {
  FittedModel model;
  TrialFrame fitted_frame;  // the frame the model was actually fit on
  std::vector<SubgroupEstimate> estimates;
  ClusterStats clusters;
  bool subgroups_at_cluster_level = false;
};

// Clustered design, subgroups defined on individuals. Fits the unit-level
// model under subgroup-size weighting, or the model on cluster-cell means
// under equal-cluster weighting.
ClusteredResult clustered_individual(const TrialFrame& frame, const ModelSpec& spec);

// Clustered design where every cluster lies wholly inside one subgroup.
// Same point estimates as the individual route; the variance layer treats
// the number of subgroup clusters as random.
ClusteredResult clustered_cluster_level(const TrialFrame& frame, const ModelSpec& spec);

/// Weighted respondent analysis: the model is fit on respondents with their
// nonresponse weights (this is what fit_model already does on a response
// frame); this wrapper names the estimand and validates inputs.
struct NonresponseResult {
  FittedModel model;
  std::vector<SubgroupEstimate> estimates;
  std::vector<double> response_rate;   // per subgroup, full-sample denominator
  std::vector<double> mean_weight;     // per subgroup, respondents
};

NonresponseResult nonresponse_weighted(const TrialFrame& frame, const ModelSpec& spec);

struct OverallEstimate {
  double tau_hat = 0.0;
  double variance = 0.0;
  double df = 0.0;  // Satterthwaite combination of the component df
};

// Population-share weighted combination of subgroup effects; components are
// treated as independent.
OverallEstimate poststratified_overall(const std::vector<SubgroupEstimate>& estimates,
                                       const std::vector<double>& variances,
                                       const std::vector<double>& dfs);

}  // namespace subrct

#pragma once

#include <string>
#include <vector>

#include "subrct/data_model.hpp"
#include "subrct/estimators.hpp"
#include "subrct/inference.hpp"
#include "subrct/variance.hpp"

namespace subrct {

struct AnalyzeOptions {
  CovariateForm covariates = CovariateForm::None;
  Centering centering = Centering::Centered;
  std::vector<std::string> variants;  // see known_variants_for_route
  double alpha = 0.05;
  bool equal_effects = true;
  bool overall = false;
  bool restricted = false;          // blocked precision-weighted points too
  bool cluster_subgroups = false;   // subgroups are whole clusters
};

struct VariantCell {
  std::string variant;
  double variance = 0.0;
  double se = 0.0;
  double df = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 1.0;
  bool clamped = false;
  std::vector<std::string> notes;
};

struct SubgroupRow {
  SubgroupEstimate est;
  std::vector<VariantCell> cells;
};

struct EqualEffectsRow {
  std::string variant;
  EqualEffectsTest test;
};

struct OverallRow {
  std::string variant;
  OverallEstimate estimate;
  SubgroupTest test;
};

struct AnalysisReport {
  std::string route;  // simple | nonresponse | blocked | clustered | ...
  std::vector<std::string> subgroup_labels;
  std::vector<std::string> block_labels;
  std::vector<SubgroupRow> rows;
  std::vector<EqualEffectsRow> equal_effects;
  std::vector<OverallRow> overall;
  std::vector<SubgroupEstimate> diff_means;   // unadjusted reference, simple only
  std::vector<SubgroupEstimate> restricted;   // optional blocked pooling
  std::vector<BlockEstimate> per_block;
  std::vector<std::pair<int, int>> excluded_cells;  // (block, subgroup)
  std::vector<Violation> warnings;
  std::vector<std::string> notes;
  double alpha = 0.05;
};

// Validates, routes by design structure and response columns, and assembles
// the per-subgroup estimate/variance/test table.
AnalysisReport run_analysis(const Dataset& dataset, const AnalyzeOptions& options);

// The variance menu available to a route, for config validation and docs.
std::vector<std::string> known_variants_for_route(const std::string& route);

// Collapses a clustered-within-blocks design to one row per
// (cluster, subgroup) cell so the blocked machinery can run on it.
TrialFrame aggregate_clusters(const TrialFrame& frame);

}  // namespace subrct

#include "subrct/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "subrct/errors.hpp"

namespace subrct {

namespace {

struct SampleCounts {
  long n = 0;
  long n1 = 0;
  long n0 = 0;
  long total = 0;  // estimation-sample size over all subgroups
};

SampleCounts subgroup_counts(const TrialFrame& frame, int subgroup) {
  SampleCounts c;
  for (int i = 0; i < frame.n; ++i) {
    if (!frame.in_sample(i)) continue;
    ++c.total;
    if (frame.g[static_cast<size_t>(i)] != subgroup) continue;
    ++c.n;
    if (frame.t[static_cast<size_t>(i)])
      ++c.n1;
    else
      ++c.n0;
  }
  return c;
}

}  // namespace

FittedModel fit_model(const TrialFrame& frame, const ModelSpec& spec) {
  FittedModel m;
  m.design = build_design(frame, spec);
  m.fit = solve_least_squares(m.design);
  return m;
}

SubgroupEstimate diff_in_means(const TrialFrame& frame, int subgroup) {
  if (subgroup < 0 || subgroup >= frame.K)
    throw DomainError("subgroup index out of range");
  SubgroupEstimate e;
  e.subgroup = subgroup;
  e.label = frame.subgroup_labels[static_cast<size_t>(subgroup)];
  e.kind = "diff_in_means";
  double s1 = 0.0, s0 = 0.0;
  for (int i = 0; i < frame.n; ++i) {
    if (!frame.in_sample(i) || frame.g[static_cast<size_t>(i)] != subgroup) continue;
    if (frame.t[static_cast<size_t>(i)])
      s1 += 1.0 * frame.y[i];
    else
      s0 += 1.0 * frame.y[i];
  }
  const SampleCounts c = subgroup_counts(frame, subgroup);
  if (c.n1 == 0 || c.n0 == 0)
    throw EstimationError("empty_cell", "subgroup " + e.label + " has an empty arm");
  e.n_k = c.n;
  e.n_k1 = c.n1;
  e.n_k0 = c.n0;
  e.pi_k = static_cast<double>(c.n) / static_cast<double>(c.total);
  e.tau_hat = s1 / static_cast<double>(c.n1) - s0 / static_cast<double>(c.n0);
  return e;
}

std::vector<SubgroupEstimate> subgroup_estimates(const TrialFrame& frame,
                                                 const FittedModel& model,
                                                 const std::string& kind) {
  if (model.design.spec.blocked)
    throw DomainError("use blocked_estimates for blocked models");
  std::vector<SubgroupEstimate> out;
  const long total = static_cast<long>(model.design.rows.size());
  for (size_t c = 0; c < model.design.cells.size(); ++c) {
    const EffectCell& cell = model.design.cells[c];
    SubgroupEstimate e;
    e.subgroup = cell.subgroup;
    e.label = frame.subgroup_labels[static_cast<size_t>(cell.subgroup)];
    e.kind = kind;
    e.tau_hat = tau_of_cell(model.design, model.fit, c);
    e.n_k1 = cell.n1;
    e.n_k0 = cell.n0;
    e.n_k = cell.n1 + cell.n0;
    e.pi_k = static_cast<double>(e.n_k) / static_cast<double>(total);
    out.push_back(std::move(e));
  }
  return out;
}

BlockedEstimates blocked_estimates(const TrialFrame& frame, const FittedModel& model) {
  if (!model.design.spec.blocked)
    throw DomainError("blocked_estimates needs a blocked model");
  BlockedEstimates out;
  out.excluded_cells = model.design.excluded_cells;

  std::map<int, std::vector<size_t>> cells_of_subgroup;
  for (size_t c = 0; c < model.design.cells.size(); ++c) {
    const EffectCell& cell = model.design.cells[c];
    BlockEstimate be;
    be.block = cell.block;
    be.subgroup = cell.subgroup;
    be.tau_hat = tau_of_cell(model.design, model.fit, c);
    be.n_bk1 = cell.n1;
    be.n_bk0 = cell.n0;
    be.n_bk = cell.n1 + cell.n0;
    out.per_block.push_back(be);
    cells_of_subgroup[cell.subgroup].push_back(c);
  }

  const long total = static_cast<long>(model.design.rows.size());
  for (const auto& [k, cell_ids] : cells_of_subgroup) {
    SubgroupEstimate e;
    e.subgroup = k;
    e.label = frame.subgroup_labels[static_cast<size_t>(k)];
    e.kind = "blocked";
    for (size_t c : cell_ids) {
      const EffectCell& cell = model.design.cells[c];
      e.n_k1 += cell.n1;
      e.n_k0 += cell.n0;
    }
    e.n_k = e.n_k1 + e.n_k0;
    e.pi_k = static_cast<double>(e.n_k) / static_cast<double>(total);
    if (cell_ids.size() == 1) {
      // Single estimable block: the pooled effect is that block's effect.
      e.tau_hat = tau_of_cell(model.design, model.fit, cell_ids[0]);
    } else {
      double num = 0.0, den = 0.0;
      for (size_t c : cell_ids) {
        const EffectCell& cell = model.design.cells[c];
        const double w = static_cast<double>(cell.n1 + cell.n0);
        num += w * tau_of_cell(model.design, model.fit, c);
        den += w;
      }
      e.tau_hat = num / den;
    }
    out.pooled.push_back(std::move(e));
  }
  return out;
}

std::vector<SubgroupEstimate> blocked_restricted(const TrialFrame& frame,
                                                 const FittedModel& model) {
  if (!model.design.spec.blocked)
    throw DomainError("blocked_restricted needs a blocked model");
  std::map<int, std::vector<size_t>> cells_of_subgroup;
  for (size_t c = 0; c < model.design.cells.size(); ++c)
    cells_of_subgroup[model.design.cells[c].subgroup].push_back(c);

  const long total = static_cast<long>(model.design.rows.size());
  std::vector<SubgroupEstimate> out;
  for (const auto& [k, cell_ids] : cells_of_subgroup) {
    SubgroupEstimate e;
    e.subgroup = k;
    e.label = frame.subgroup_labels[static_cast<size_t>(k)];
    e.kind = "blocked_restricted";
    double num = 0.0, den = 0.0;
    for (size_t c : cell_ids) {
      const EffectCell& cell = model.design.cells[c];
      const double n_bk = static_cast<double>(cell.n1 + cell.n0);
      const double p_bk = static_cast<double>(cell.n1) / n_bk;
      const double w = n_bk * p_bk * (1.0 - p_bk);
      num += w * tau_of_cell(model.design, model.fit, c);
      den += w;
      e.n_k1 += cell.n1;
      e.n_k0 += cell.n0;
    }
    e.n_k = e.n_k1 + e.n_k0;
    e.pi_k = static_cast<double>(e.n_k) / static_cast<double>(total);
    e.tau_hat = num / den;
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

/// Builds the cluster-cell mean frame used under equal-cluster weighting:
// one row per (cluster, subgroup) cell, in (cluster, subgroup) order.
TrialFrame cluster_mean_frame(const TrialFrame& frame) {
  std::map<std::pair<int, int>, std::vector<int>> members;
  for (int i = 0; i < frame.n; ++i) {
    if (!frame.in_sample(i)) continue;
    members[{frame.cluster[static_cast<size_t>(i)], frame.g[static_cast<size_t>(i)]}]
        .push_back(i);
  }
  TrialFrame cf;
  cf.n = static_cast<int>(members.size());
  cf.K = frame.K;
  cf.V = frame.V;
  cf.design = frame.design;
  cf.subgroup_labels = frame.subgroup_labels;
  cf.cluster_labels = frame.cluster_labels;
  cf.covariate_names = frame.covariate_names;
  cf.y.resize(cf.n);
  cf.t.resize(static_cast<size_t>(cf.n));
  cf.g.resize(static_cast<size_t>(cf.n));
  cf.cluster.resize(static_cast<size_t>(cf.n));
  cf.x.resize(cf.n, cf.V);
  int r = 0;
  for (const auto& [key, rows] : members) {
    double sy = 0.0;
    Eigen::RowVectorXd sx = Eigen::RowVectorXd::Zero(cf.V);
    for (int i : rows) {
      sy += frame.y[i];
      if (cf.V > 0) sx += frame.x.row(i);
    }
    const double m = static_cast<double>(rows.size());
    cf.y[r] = sy / m;
    if (cf.V > 0) cf.x.row(r) = sx / m;
    cf.t[static_cast<size_t>(r)] = frame.t[static_cast<size_t>(rows.front())];
    cf.g[static_cast<size_t>(r)] = key.second;
    cf.cluster[static_cast<size_t>(r)] = key.first;
    ++r;
  }
  return cf;
}

ClusterStats cluster_statistics(const TrialFrame& frame, const FittedModel& model,
                                bool equal_weighting) {
  ClusterStats cs;
  const int m = frame.n_clusters();
  cs.m = m;
  std::vector<int> cluster_arm(static_cast<size_t>(m), -1);
  std::map<std::pair<int, int>, ClusterCell> cells;

  // Aggregate fit residuals to (cluster, subgroup) means. The model may have
  // been fit on unit rows or on cluster-cell rows; in both cases residual
  // rows map back to frame rows of the *fitted* frame, so the caller passes
  // the frame the model was fit on.
  const TrialFrame& ff = frame;
  for (int r = 0; r < model.design.n_rows(); ++r) {
    const int fi = model.design.rows[static_cast<size_t>(r)];
    const int j = ff.cluster[static_cast<size_t>(fi)];
    const int k = ff.g[static_cast<size_t>(fi)];
    auto& cell = cells[{j, k}];
    cell.cluster = j;
    cell.subgroup = k;
    cell.t = ff.t[static_cast<size_t>(fi)];
    cell.n_jk += 1;
    cell.resid_mean += model.fit.residuals[r];
    cluster_arm[static_cast<size_t>(j)] = cell.t;
  }
  for (auto& [key, cell] : cells) {
    cell.resid_mean /= static_cast<double>(cell.n_jk);
    cell.weight = equal_weighting ? 1.0 : static_cast<double>(cell.n_jk);
    cs.cells.push_back(cell);
  }
  for (int j = 0; j < m; ++j) {
    if (cluster_arm[static_cast<size_t>(j)] == 1)
      ++cs.m1;
    else if (cluster_arm[static_cast<size_t>(j)] == 0)
      ++cs.m0;
  }
  cs.m_k.assign(static_cast<size_t>(frame.K), 0);
  cs.m_k1.assign(static_cast<size_t>(frame.K), 0);
  cs.m_k0.assign(static_cast<size_t>(frame.K), 0);
  cs.wbar_k.assign(static_cast<size_t>(frame.K), 0.0);
  for (const auto& cell : cs.cells) {
    auto k = static_cast<size_t>(cell.subgroup);
    cs.m_k[k] += 1;
    if (cell.t)
      cs.m_k1[k] += 1;
    else
      cs.m_k0[k] += 1;
    cs.wbar_k[k] += cell.weight;
  }
  for (auto& w : cs.wbar_k) w /= static_cast<double>(std::max<long>(cs.m, 1));
  return cs;
}

}  // namespace

ClusteredResult clustered_individual(const TrialFrame& frame, const ModelSpec& spec) {
  if (!frame.design.clustered())
    throw EstimationError("clustered estimator needs a clustered design");
  if (spec.blocked)
    throw EstimationError("blocked clustered models are handled by aggregation");

  ClusteredResult out;
  const bool equal =
      frame.design.cluster_weighting == ClusterWeighting::EqualCluster;
  if (equal) {
    TrialFrame cf = cluster_mean_frame(frame);
    out.model = fit_model(cf, spec);
    out.clusters = cluster_statistics(cf, out.model, true);
    out.estimates = subgroup_estimates(cf, out.model, "clustered_equal");
    out.fitted_frame = std::move(cf);
    // Report unit-level counts, not cluster-cell counts.
    for (auto& e : out.estimates) {
      const SampleCounts c = subgroup_counts(frame, e.subgroup);
      e.n_k = c.n;
      e.n_k1 = c.n1;
      e.n_k0 = c.n0;
      e.pi_k = static_cast<double>(c.n) / static_cast<double>(c.total);
    }
  } else {
    out.model = fit_model(frame, spec);
    out.clusters = cluster_statistics(frame, out.model, false);
    out.estimates = subgroup_estimates(frame, out.model, "clustered");
    out.fitted_frame = frame;
  }
  return out;
}

ClusteredResult clustered_cluster_level(const TrialFrame& frame,
                                        const ModelSpec& spec) {
  // Every cluster must lie wholly inside one subgroup.
  std::vector<int> cluster_subgroup(static_cast<size_t>(frame.n_clusters()), -1);
  for (int i = 0; i < frame.n; ++i) {
    if (!frame.in_sample(i)) continue;
    auto j = static_cast<size_t>(frame.cluster[static_cast<size_t>(i)]);
    const int k = frame.g[static_cast<size_t>(i)];
    if (cluster_subgroup[j] == -1)
      cluster_subgroup[j] = k;
    else if (cluster_subgroup[j] != k)
      throw EstimationError(
          "cluster_level_subgroup",
          "cluster " + frame.cluster_labels[j] + " spans subgroups; " +
              "cluster-level subgroup analysis needs one subgroup per cluster");
  }
  ClusteredResult out = clustered_individual(frame, spec);
  out.subgroups_at_cluster_level = true;
  for (auto& e : out.estimates) e.kind = "clustered_cluster_level";
  return out;
}

NonresponseResult nonresponse_weighted(const TrialFrame& frame, const ModelSpec& spec) {
  if (!frame.has_response())
    throw EstimationError("nonresponse estimator needs response data");
  NonresponseResult out;
  out.model = fit_model(frame, spec);
  out.estimates = subgroup_estimates(frame, out.model, "nonresponse_weighted");
  out.response_rate.assign(static_cast<size_t>(frame.K), 0.0);
  out.mean_weight.assign(static_cast<size_t>(frame.K), 0.0);
  std::vector<long> full(static_cast<size_t>(frame.K), 0);
  std::vector<long> resp(static_cast<size_t>(frame.K), 0);
  for (int i = 0; i < frame.n; ++i) {
    auto k = static_cast<size_t>(frame.g[static_cast<size_t>(i)]);
    full[k] += 1;
    if (frame.responded[static_cast<size_t>(i)]) {
      resp[k] += 1;
      out.mean_weight[k] += frame.w_r[i];
    }
  }
  for (size_t k = 0; k < full.size(); ++k) {
    out.response_rate[k] =
        static_cast<double>(resp[k]) / static_cast<double>(full[k]);
    out.mean_weight[k] /= static_cast<double>(std::max<long>(resp[k], 1));
  }
  // Full-sample subgroup counts define the estimand's denominators.
  const long total_full = static_cast<long>(frame.n);
  for (auto& e : out.estimates) {
    auto k = static_cast<size_t>(e.subgroup);
    e.n_k = full[k];
    e.pi_k = static_cast<double>(full[k]) / static_cast<double>(total_full);
  }
  return out;
}

OverallEstimate poststratified_overall(const std::vector<SubgroupEstimate>& estimates,
                                       const std::vector<double>& variances,
                                       const std::vector<double>& dfs) {
  if (estimates.empty()) throw DomainError("no subgroup estimates to combine");
  if (variances.size() != estimates.size() || dfs.size() != estimates.size())
    throw DomainError("poststratified_overall needs one variance and df per subgroup");
  double pi_total = 0.0;
  for (const auto& e : estimates) pi_total += e.pi_k;
  if (std::abs(pi_total - 1.0) > 1e-8)
    throw DomainError("subgroup shares must sum to 1 for the overall combination");

  OverallEstimate out;
  double sat_den = 0.0;
  for (size_t k = 0; k < estimates.size(); ++k) {
    const double pk = estimates[k].pi_k;
    out.tau_hat += pk * estimates[k].tau_hat;
    const double term = pk * pk * variances[k];
    out.variance += term;
    if (dfs[k] > 0.0) sat_den += term * term / dfs[k];
  }
  out.df = sat_den > 0.0 ? out.variance * out.variance / sat_den
                         : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace subrct

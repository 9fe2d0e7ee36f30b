#include "subrct/variance.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "subrct/design_math.hpp"
#include "subrct/errors.hpp"

namespace subrct {

namespace {

bool row_treated(const DesignData& d, int r) {
  return d.X(r, d.cells[static_cast<size_t>(d.row_cell[static_cast<size_t>(r)])].col) >
         0.0;
}

struct ArmStats {
  long n1 = 0, n0 = 0;
  double pi1 = 0.0, pi0 = 0.0;  // arm shares of the subgroup
  double denom1 = 0.0, denom0 = 0.0;
  double s2_1 = 0.0, s2_0 = 0.0;
  double p = 0.5;
  long n_k = 0;
  double pi_k = 0.0;
  size_t cell = 0;
};

int find_cell(const DesignData& d, int subgroup) {
  const int c = d.cell_index(-1, subgroup);
  if (c < 0) throw DomainError("subgroup has no estimable cell in this model");
  return c;
}

// Covariate degrees of freedom charged to each arm of a cell. The pooled
// model spreads its V coefficients across cells in proportion to size and
// rate; the interacted model gives each cell its own V per arm.
void covariate_charge(const DesignData& d, double p, double pi1, double pi0,
                      double* c1, double* c0) {
  switch (d.spec.covariates) {
    case CovariateForm::None:
      *c1 = *c0 = 0.0;
      return;
    case CovariateForm::Pooled:
      *c1 = d.V * p * pi1;
      *c0 = d.V * (1.0 - p) * pi0;
      return;
    case CovariateForm::InteractedBySubgroupAndArm:
      *c1 = static_cast<double>(d.V);
      *c0 = static_cast<double>(d.V);
      return;
  }
}

ArmStats arm_stats(const FittedModel& model, int subgroup, bool phi_adjust) {
  const DesignData& d = model.design;
  if (d.spec.blocked) throw DomainError("arm statistics expect an unblocked fit");
  ArmStats st;
  st.cell = static_cast<size_t>(find_cell(d, subgroup));
  const EffectCell& cell = d.cells[st.cell];
  st.n1 = cell.n1;
  st.n0 = cell.n0;
  st.n_k = cell.n1 + cell.n0;
  st.p = cell.p;

  long total1 = 0, total0 = 0;
  for (const auto& c : d.cells) {
    total1 += c.n1;
    total0 += c.n0;
  }
  st.pi1 = static_cast<double>(st.n1) / static_cast<double>(total1);
  st.pi0 = static_cast<double>(st.n0) / static_cast<double>(total0);
  st.pi_k = static_cast<double>(st.n_k) / static_cast<double>(total1 + total0);

  double rss1 = 0.0, rss0 = 0.0;
  for (int r = 0; r < d.n_rows(); ++r) {
    if (d.row_cell[static_cast<size_t>(r)] != static_cast<int>(st.cell)) continue;
    const double e = model.fit.residuals[r];
    if (row_treated(d, r))
      rss1 += e * e;
    else
      rss0 += e * e;
  }
  double c1 = 0.0, c0 = 0.0;
  covariate_charge(d, st.p, st.pi1, st.pi0, &c1, &c0);
  st.denom1 = static_cast<double>(st.n1) - c1 - (phi_adjust ? st.pi1 : 1.0);
  st.denom0 = static_cast<double>(st.n0) - c0 - (phi_adjust ? st.pi0 : 1.0);
  if (st.denom1 <= 0.0 || st.denom0 <= 0.0)
    throw EstimationError("insufficient_cell",
                          "subgroup arm too small for a residual variance");
  st.s2_1 = rss1 / st.denom1;
  st.s2_0 = rss0 / st.denom0;
  return st;
}

double design_df(const DesignData& d, long n_k, double pi_k,
                 std::vector<std::string>* notes) {
  double charge = 0.0;
  if (d.spec.covariates == CovariateForm::Pooled) {
    charge = d.V * pi_k;
  } else if (d.spec.covariates == CovariateForm::InteractedBySubgroupAndArm) {
    charge = 2.0 * d.V;
    if (notes) notes->push_back("df_interacted_full_charge");
  }
  return static_cast<double>(n_k) - charge - 2.0;
}

double bm_from_denominators(double n1, double n0, double d1, double d0) {
  const double tot = n1 + n0;
  return tot * tot * d1 * d0 / (n1 * n1 * d1 + n0 * n0 * d0);
}

// Share of the effect column's (weighted) variation explained by the other
// design columns.
double effect_column_r2(const DesignData& d, int col) {
  const int n = d.n_rows();
  const int m = d.n_cols();
  const Eigen::VectorXd sw = d.w.array().sqrt();
  Eigen::VectorXd c = sw.array() * d.X.col(col).array();
  Eigen::MatrixXd others(n, m - 1);
  int j = 0;
  for (int cc = 0; cc < m; ++cc) {
    if (cc == col) continue;
    others.col(j++) = sw.array() * d.X.col(cc).array();
  }
  const double wsum = d.w.sum();
  const double cbar = (d.w.array() * d.X.col(col).array()).sum() / wsum;
  const double tss = (d.w.array() * (d.X.col(col).array() - cbar).square()).sum();
  if (tss <= 0.0) throw DomainError("effect column has no variation");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(others,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd gamma = svd.solve(c);
  const double rss = (c - others * gamma).squaredNorm();
  return 1.0 - rss / tss;
}

void apply_heterogeneity_bound(double s2_1, double s2_0, long n_k, VarResult* out) {
  const double gap = std::sqrt(s2_1) - std::sqrt(s2_0);
  out->variance -= gap * gap / static_cast<double>(n_k);
  if (out->variance < 0.0) {
    out->variance = 0.0;
    out->clamped = true;
    out->notes.push_back("heterogeneity_bound_clamped");
  }
}

}  // namespace

VarResult var_design_based(const FittedModel& model, int subgroup,
                           const VarianceOptions& opts) {
  const ArmStats st = arm_stats(model, subgroup, opts.phi_adjust);
  VarResult out;
  const double d1 = opts.basis == SizeBasis::Actual
                        ? static_cast<double>(st.n1)
                        : static_cast<double>(st.n_k) * st.p;
  const double d0 = opts.basis == SizeBasis::Actual
                        ? static_cast<double>(st.n0)
                        : static_cast<double>(st.n_k) * (1.0 - st.p);
  out.variance = st.s2_1 / d1 + st.s2_0 / d0;
  if (opts.heterogeneity_bound)
    apply_heterogeneity_bound(st.s2_1, st.s2_0, st.n_k, &out);
  if (opts.r2_adjust) {
    if (model.design.V == 0)
      throw ConfigError("the collinearity adjustment needs covariates in the model");
    const double r2 =
        effect_column_r2(model.design,
                         model.design.cells[st.cell].col);
    out.variance /= (1.0 - r2);
  }
  switch (opts.df_rule) {
    case DfRule::DesignBased:
      out.df = design_df(model.design, st.n_k, st.pi_k, &out.notes);
      break;
    case DfRule::BellMcCaffrey:
      out.df = bm_from_denominators(static_cast<double>(st.n1),
                                    static_cast<double>(st.n0), st.denom1,
                                    st.denom0);
      break;
    case DfRule::Normal:
      out.df = std::numeric_limits<double>::infinity();
      break;
  }
  return out;
}

VarResult var_huber_white(const FittedModel& model, int subgroup) {
  const DesignData& d = model.design;
  if (d.spec.blocked)
    throw DomainError("the sandwich variance here expects an unblocked fit");
  const int n = d.n_rows();
  const int l = d.n_cols();
  if (n <= l) throw EstimationError("too few rows for the sandwich correction");
  const int col = d.cells[static_cast<size_t>(find_cell(d, subgroup))].col;

  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(l, l);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(l, l);
  for (int r = 0; r < n; ++r) {
    const Eigen::RowVectorXd x = d.X.row(r);
    const double w = d.w[r];
    const double e = model.fit.residuals[r];
    xtx.noalias() += w * x.transpose() * x;
    meat.noalias() += (w * e) * (w * e) * x.transpose() * x;
  }
  const Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(l, l));
  const double g = static_cast<double>(n) / static_cast<double>(n - l);
  const Eigen::MatrixXd cov = g * bread * meat * bread;

  VarResult out;
  out.variance = cov(col, col);
  out.df = static_cast<double>(n - l);
  return out;
}

VarResult var_finite_sample(const FittedModel& model, int subgroup,
                            const VarianceOptions& opts) {
  const ArmStats st = arm_stats(model, subgroup, opts.phi_adjust);
  long total1 = 0, total = 0;
  for (const auto& c : model.design.cells) {
    total1 += c.n1;
    total += c.n1 + c.n0;
  }
  AllocationLaw law{total, total1, st.n_k};
  return var_finite_sample(model, subgroup, opts,
                           design_math::expected_inverse_arm_size(law, 1),
                           design_math::expected_inverse_arm_size(law, 0));
}

VarResult var_finite_sample(const FittedModel& model, int subgroup,
                            const VarianceOptions& opts, double e_inv1,
                            double e_inv0) {
  const ArmStats st = arm_stats(model, subgroup, opts.phi_adjust);
  VarResult out;
  out.variance = e_inv1 * st.s2_1 + e_inv0 * st.s2_0;
  out.df = design_df(model.design, st.n_k, st.pi_k, &out.notes);
  return out;
}

BlockedVarianceResult var_blocked(const FittedModel& model, int subgroup,
                                  const VarianceOptions& opts) {
  const DesignData& d = model.design;
  if (!d.spec.blocked) throw DomainError("var_blocked needs a blocked fit");

  // Block and overall totals over design rows.
  std::map<int, std::array<long, 2>> block_arm;  // block -> {control, treated}
  long n_total = d.n_rows();
  for (int r = 0; r < d.n_rows(); ++r) {
    const auto& cell = d.cells[static_cast<size_t>(d.row_cell[static_cast<size_t>(r)])];
    block_arm[cell.block][row_treated(d, r) ? 1 : 0] += 1;
  }

  BlockedVarianceResult out;
  double pooled_num = 0.0;
  long n_k = 0;
  long h = 0;
  std::vector<double> cell_vars;
  for (size_t c = 0; c < d.cells.size(); ++c) {
    const EffectCell& cell = d.cells[c];
    if (cell.subgroup != subgroup) continue;
    const auto& arm = block_arm.at(cell.block);
    const double n_b = static_cast<double>(arm[0] + arm[1]);
    const double q_b = n_b / static_cast<double>(n_total);
    const double pi1 = static_cast<double>(cell.n1) / static_cast<double>(arm[1]);
    const double pi0 = static_cast<double>(cell.n0) / static_cast<double>(arm[0]);
    const double p_b = cell.p;
    double charge1 = 0.0, charge0 = 0.0;
    if (d.spec.covariates == CovariateForm::Pooled) {
      charge1 = d.V * q_b * p_b * pi1;
      charge0 = d.V * q_b * (1.0 - p_b) * pi0;
    }
    const double denom1 =
        static_cast<double>(cell.n1) - charge1 - (opts.phi_adjust ? pi1 : 1.0);
    const double denom0 =
        static_cast<double>(cell.n0) - charge0 - (opts.phi_adjust ? pi0 : 1.0);
    if (denom1 <= 0.0 || denom0 <= 0.0)
      throw EstimationError("insufficient_cell",
                            "block cell too small for a residual variance");
    double rss1 = 0.0, rss0 = 0.0;
    for (int r = 0; r < d.n_rows(); ++r) {
      if (d.row_cell[static_cast<size_t>(r)] != static_cast<int>(c)) continue;
      const double e = model.fit.residuals[r];
      if (row_treated(d, r))
        rss1 += e * e;
      else
        rss0 += e * e;
    }
    const double s2_1 = rss1 / denom1;
    const double s2_0 = rss0 / denom0;
    const double n_bk = static_cast<double>(cell.n1 + cell.n0);
    const double d1 = opts.basis == SizeBasis::Actual
                          ? static_cast<double>(cell.n1)
                          : n_bk * p_b;
    const double d0 = opts.basis == SizeBasis::Actual
                          ? static_cast<double>(cell.n0)
                          : n_bk * (1.0 - p_b);
    VarResult bv;
    bv.variance = s2_1 / d1 + s2_0 / d0;
    if (opts.heterogeneity_bound)
      apply_heterogeneity_bound(s2_1, s2_0, cell.n1 + cell.n0, &bv);
    if (opts.r2_adjust) {
      if (d.V == 0)
        throw ConfigError("the collinearity adjustment needs covariates in the model");
      bv.variance /= (1.0 - effect_column_r2(d, cell.col));
    }
    if (bv.clamped) {
      out.pooled.clamped = true;
      out.pooled.notes.push_back("heterogeneity_bound_clamped");
    }
    out.per_block.push_back({cell.block, bv.variance});
    cell_vars.push_back(bv.variance);
    pooled_num += n_bk * n_bk * bv.variance;
    n_k += cell.n1 + cell.n0;
    h += 1;
  }
  if (h == 0) throw DomainError("subgroup has no estimable block cell");

  if (h == 1) {
    out.pooled.variance = cell_vars.front();
  } else {
    out.pooled.variance =
        pooled_num / (static_cast<double>(n_k) * static_cast<double>(n_k));
  }
  const double pi_k = static_cast<double>(n_k) / static_cast<double>(n_total);
  const double charge = d.spec.covariates == CovariateForm::Pooled ? d.V * pi_k : 0.0;
  out.pooled.df = opts.df_rule == DfRule::Normal
                      ? std::numeric_limits<double>::infinity()
                      : static_cast<double>(n_k) - charge - 2.0 * static_cast<double>(h);
  if (opts.df_rule == DfRule::BellMcCaffrey)
    out.pooled.notes.push_back("bm_df_unavailable_blocked");
  return out;
}

namespace {

struct ClusterArmTotals {
  long m1 = 0, m0 = 0;  // cluster cells of this subgroup by arm
};

// Random-cluster-count variance shared by the cluster-level-subgroup
// estimator and the partial-presence fallback.
VarResult cluster_random_count_variance(const ClusteredResult& res, int subgroup,
                                        const VarianceOptions& opts) {
  const ClusterStats& cs = res.clusters;
  const DesignData& d = res.model.design;
  const double p = d.cells.front().p;
  auto k = static_cast<size_t>(subgroup);
  const long m_k = cs.m_k[k];
  const long m_k1 = cs.m_k1[k];
  const long m_k0 = cs.m_k0[k];
  if (m_k < 2 || m_k1 < 2 || m_k0 < 2)
    throw EstimationError("insufficient_cell",
                          "too few subgroup clusters for a variance");
  const double pi_clus = static_cast<double>(m_k) / static_cast<double>(cs.m);
  const double pi1 = static_cast<double>(m_k1) / static_cast<double>(cs.m1);
  const double pi0 = static_cast<double>(m_k0) / static_cast<double>(cs.m0);

  double wstar2 = 0.0;
  for (const auto& cell : cs.cells)
    if (cell.subgroup == subgroup) wstar2 += cell.weight * cell.weight;
  wstar2 /= static_cast<double>(m_k);

  double charge1 = 0.0, charge0 = 0.0;
  if (d.spec.covariates == CovariateForm::Pooled) {
    charge1 = d.V * p * pi1;
    charge0 = d.V * (1.0 - p) * pi0;
  }
  const double denom1 =
      static_cast<double>(m_k1) - charge1 - (opts.phi_adjust ? pi1 : 1.0);
  const double denom0 =
      static_cast<double>(m_k0) - charge0 - (opts.phi_adjust ? pi0 : 1.0);
  if (denom1 <= 0.0 || denom0 <= 0.0)
    throw EstimationError("insufficient_cell",
                          "too few subgroup clusters for a variance");
  double o2_1 = 0.0, o2_0 = 0.0;
  for (const auto& cell : cs.cells) {
    if (cell.subgroup != subgroup) continue;
    const double term =
        cell.weight * cell.weight / wstar2 * cell.resid_mean * cell.resid_mean;
    if (cell.t)
      o2_1 += term;
    else
      o2_0 += term;
  }
  o2_1 /= denom1;
  o2_0 /= denom0;

  VarResult out;
  if (opts.basis == SizeBasis::Expected) {
    const double phi = design_math::phi_correction(m_k, pi_clus);
    out.variance = phi * (o2_1 / (static_cast<double>(m_k) * p) +
                          o2_0 / (static_cast<double>(m_k) * (1.0 - p)));
  } else {
    out.variance = o2_1 / static_cast<double>(m_k1) + o2_0 / static_cast<double>(m_k0);
    out.notes.push_back("actual_cluster_counts_no_phi");
  }
  out.df = opts.df_rule == DfRule::Normal
               ? std::numeric_limits<double>::infinity()
               : static_cast<double>(m_k) -
                     (d.spec.covariates == CovariateForm::Pooled ? d.V * pi_clus : 0.0) -
                     2.0;
  out.notes.push_back("df_cluster_analog");
  return out;
}

}  // namespace

VarResult var_cluster_design_based(const ClusteredResult& res, int subgroup,
                                   const VarianceOptions& opts) {
  const ClusterStats& cs = res.clusters;
  auto k = static_cast<size_t>(subgroup);
  if (cs.m_k[k] < cs.m) {
    VarResult out = cluster_random_count_variance(res, subgroup, opts);
    out.notes.push_back("partial_cluster_presence");
    return out;
  }
  const DesignData& d = res.model.design;
  const double p = d.cells.front().p;
  const double wbar = cs.wbar_k[k];
  const long m1 = cs.m1;
  const long m0 = cs.m0;
  if (m1 < 2 || m0 < 2)
    throw EstimationError("insufficient_cell", "too few clusters for a variance");
  const double pi1 = static_cast<double>(cs.m_k1[k]) / static_cast<double>(m1);
  const double pi0 = static_cast<double>(cs.m_k0[k]) / static_cast<double>(m0);
  double charge1 = 0.0, charge0 = 0.0;
  if (d.spec.covariates == CovariateForm::Pooled) {
    charge1 = d.V * p * pi1;
    charge0 = d.V * (1.0 - p) * pi0;
  }
  const double denom1 =
      static_cast<double>(m1) - charge1 - (opts.phi_adjust ? pi1 : 1.0);
  const double denom0 =
      static_cast<double>(m0) - charge0 - (opts.phi_adjust ? pi0 : 1.0);
  if (denom1 <= 0.0 || denom0 <= 0.0)
    throw EstimationError("insufficient_cell", "too few clusters for a variance");

  double s2_1 = 0.0, s2_0 = 0.0;
  for (const auto& cell : cs.cells) {
    if (cell.subgroup != subgroup) continue;
    const double u = cell.weight / wbar;
    const double term = u * u * cell.resid_mean * cell.resid_mean;
    if (cell.t)
      s2_1 += term;
    else
      s2_0 += term;
  }
  s2_1 /= denom1;
  s2_0 /= denom0;

  VarResult out;
  const double d1 = opts.basis == SizeBasis::Actual
                        ? static_cast<double>(m1)
                        : static_cast<double>(cs.m) * p;
  const double d0 = opts.basis == SizeBasis::Actual
                        ? static_cast<double>(m0)
                        : static_cast<double>(cs.m) * (1.0 - p);
  out.variance = s2_1 / d1 + s2_0 / d0;
  const double pi_clus = static_cast<double>(cs.m_k[k]) / static_cast<double>(cs.m);
  out.df = opts.df_rule == DfRule::Normal
               ? std::numeric_limits<double>::infinity()
               : static_cast<double>(cs.m_k[k]) -
                     (d.spec.covariates == CovariateForm::Pooled ? d.V * pi_clus : 0.0) -
                     2.0;
  out.notes.push_back("df_cluster_analog");
  return out;
}

VarResult var_crse(const ClusteredResult& res, int subgroup) {
  const DesignData& d = res.model.design;
  const TrialFrame& ff = res.fitted_frame;
  const int n = d.n_rows();
  const int l = d.n_cols();
  const int col = d.cells[static_cast<size_t>(find_cell(d, subgroup))].col;

  std::map<int, Eigen::VectorXd> scores;
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(l, l);
  for (int r = 0; r < n; ++r) {
    const int fi = d.rows[static_cast<size_t>(r)];
    const int j = ff.cluster[static_cast<size_t>(fi)];
    const double w = d.w[r];
    const Eigen::RowVectorXd x = d.X.row(r);
    xtx.noalias() += w * x.transpose() * x;
    auto it = scores.find(j);
    if (it == scores.end())
      it = scores.emplace(j, Eigen::VectorXd::Zero(l)).first;
    it->second += w * res.model.fit.residuals[r] * x.transpose();
  }
  const long m = static_cast<long>(scores.size());
  if (m < 2) throw EstimationError("too few clusters for a sandwich variance");
  if (n <= l) throw EstimationError("too few rows for a sandwich variance");

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(l, l);
  for (const auto& [j, s] : scores) meat.noalias() += s * s.transpose();
  const Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(l, l));
  const double g = (static_cast<double>(m) / static_cast<double>(m - 1)) *
                   (static_cast<double>(n - 1) / static_cast<double>(n - l));
  const Eigen::MatrixXd cov = g * bread * meat * bread;

  VarResult out;
  out.variance = cov(col, col);
  out.df = static_cast<double>(m - 1);
  out.notes.push_back("df_cluster_count_analog");
  return out;
}

VarResult var_cluster_level_subgroup(const ClusteredResult& res, int subgroup,
                                     const VarianceOptions& opts) {
  if (!res.subgroups_at_cluster_level)
    throw DomainError(
        "cluster-level subgroup variance needs the cluster-level estimator");
  return cluster_random_count_variance(res, subgroup, opts);
}

VarResult var_nonresponse(const NonresponseResult& res, int subgroup,
                          const VarianceOptions& opts) {
  const DesignData& d = res.model.design;
  if (d.spec.blocked) throw DomainError("respondent variance expects an unblocked fit");
  auto ksz = static_cast<size_t>(subgroup);
  const int cell_idx = find_cell(d, subgroup);
  const EffectCell& cell = d.cells[static_cast<size_t>(cell_idx)];
  const double p = cell.p;
  const double rbar = res.response_rate[ksz];
  const double wbar = res.mean_weight[ksz];

  long total1 = 0, total0 = 0;
  for (const auto& c : d.cells) {
    total1 += c.n1;
    total0 += c.n0;
  }
  const double pi1 = static_cast<double>(cell.n1) / static_cast<double>(total1);
  const double pi0 = static_cast<double>(cell.n0) / static_cast<double>(total0);
  double charge1 = 0.0, charge0 = 0.0;
  if (d.spec.covariates == CovariateForm::Pooled) {
    charge1 = d.V * p * pi1;
    charge0 = d.V * (1.0 - p) * pi0;
  } else if (d.spec.covariates == CovariateForm::InteractedBySubgroupAndArm) {
    charge1 = charge0 = static_cast<double>(d.V);
  }
  const double denom1 =
      static_cast<double>(cell.n1) - charge1 - (opts.phi_adjust ? pi1 : 1.0);
  const double denom0 =
      static_cast<double>(cell.n0) - charge0 - (opts.phi_adjust ? pi0 : 1.0);
  if (denom1 <= 0.0 || denom0 <= 0.0)
    throw EstimationError("insufficient_cell",
                          "respondent cell too small for a variance");

  double o2_1 = 0.0, o2_0 = 0.0;
  for (int r = 0; r < d.n_rows(); ++r) {
    if (d.row_cell[static_cast<size_t>(r)] != cell_idx) continue;
    const double u = d.w[r] / wbar;
    const double e = res.model.fit.residuals[r];
    const double term = u * u * e * e;
    if (row_treated(d, r))
      o2_1 += term;
    else
      o2_0 += term;
  }
  o2_1 /= denom1;
  o2_0 /= denom0;

  long n_k_full = 0;
  for (const auto& e : res.estimates)
    if (e.subgroup == subgroup) n_k_full = e.n_k;

  VarResult out;
  if (opts.basis == SizeBasis::Expected) {
    const double base = static_cast<double>(n_k_full) * rbar;
    out.variance = o2_1 / (base * p) + o2_0 / (base * (1.0 - p));
  } else {
    out.variance = o2_1 / static_cast<double>(cell.n1) +
                   o2_0 / static_cast<double>(cell.n0);
    out.notes.push_back("actual_respondent_counts");
  }
  const double pi_resp = static_cast<double>(cell.n1 + cell.n0) /
                         static_cast<double>(total1 + total0);
  double charge = 0.0;
  if (d.spec.covariates == CovariateForm::Pooled)
    charge = d.V * pi_resp;
  else if (d.spec.covariates == CovariateForm::InteractedBySubgroupAndArm)
    charge = 2.0 * d.V;
  out.df = opts.df_rule == DfRule::Normal
               ? std::numeric_limits<double>::infinity()
               : static_cast<double>(n_k_full) * rbar - charge - 2.0;
  out.notes.push_back("df_respondent_analog");
  return out;
}

double bell_mccaffrey_df(double n1, double n0, int v, double p, double pi1,
                         double pi0) {
  if (n1 < 2.0 || n0 < 2.0) throw DomainError("Welch-style df needs both arms >= 2");
  const double d1 = n1 - v * p * pi1 - 1.0;
  const double d0 = n0 - v * (1.0 - p) * pi0 - 1.0;
  if (d1 <= 0.0 || d0 <= 0.0) throw DomainError("Welch-style df needs positive denominators");
  return bm_from_denominators(n1, n0, d1, d0);
}

}  // namespace subrct

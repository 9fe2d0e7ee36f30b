#include "subrct/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "subrct/errors.hpp"

namespace subrct {

namespace {

std::string route_for(const Dataset& dataset, const AnalyzeOptions& options) {
  const Structure s = dataset.design.structure;
  if (s == Structure::BlockedClustered) return "blocked_clustered";
  if (s == Structure::Clustered)
    return options.cluster_subgroups ? "cluster_subgroups" : "clustered";
  if (s == Structure::Blocked) return "blocked";
  return dataset.has_response ? "nonresponse" : "simple";
}

void check_variants(const std::vector<std::string>& wanted,
                    const std::string& route) {
  if (wanted.empty())
    throw ConfigError("at least one variance variant is required");
  const auto known = known_variants_for_route(route);
  for (const auto& v : wanted) {
    if (std::find(known.begin(), known.end(), v) == known.end()) {
      std::string menu;
      for (const auto& k : known) {
        if (!menu.empty()) menu += ", ";
        menu += k;
      }
      throw ConfigError("variance variant '" + v + "' is not available for the " +
                        route + " route (menu: " + menu + ")");
    }
  }
}

VarianceOptions options_for(const std::string& variant) {
  VarianceOptions o;
  if (variant == "db_expected") o.basis = SizeBasis::Expected;
  if (variant == "db_actual_phi") o.phi_adjust = true;
  if (variant == "db_actual_het") o.heterogeneity_bound = true;
  if (variant == "db_actual_r2") o.r2_adjust = true;
  if (variant == "db_actual_bm") o.df_rule = DfRule::BellMcCaffrey;
  return o;
}

VariantCell make_cell(const std::string& variant, double tau, const VarResult& var,
                      double alpha) {
  VariantCell cell;
  cell.variant = variant;
  cell.variance = var.variance;
  cell.se = var.se();
  cell.df = var.df;
  cell.clamped = var.clamped;
  cell.notes = var.notes;
  if (cell.se > 0.0 && (var.df > 0.0 || std::isinf(var.df))) {
    const SubgroupTest test = subgroup_test(tau, cell.se, var.df, 0.0, alpha);
    cell.ci_lo = test.ci_lo;
    cell.ci_hi = test.ci_hi;
    cell.p_value = test.test.p_value;
  } else {
    cell.ci_lo = cell.ci_hi = tau;
    cell.p_value = std::numeric_limits<double>::quiet_NaN();
    cell.notes.push_back("test_unavailable");
  }
  return cell;
}

void add_equal_effects(AnalysisReport* report) {
  if (report->rows.size() < 2) {
    if (!report->rows.empty())
      report->notes.push_back("equal_effects_needs_two_subgroups");
    return;
  }
  const size_t n_var = report->rows.front().cells.size();
  for (size_t v = 0; v < n_var; ++v) {
    std::vector<double> tau, se, df;
    bool usable = true;
    for (const auto& row : report->rows) {
      const VariantCell& cell = row.cells[v];
      if (!(cell.se > 0.0) || !(cell.df > 0.0 || std::isinf(cell.df))) {
        usable = false;
        break;
      }
      tau.push_back(row.est.tau_hat);
      se.push_back(cell.se);
      df.push_back(cell.df);
    }
    if (!usable) {
      report->notes.push_back("equal_effects_skipped_" +
                              report->rows.front().cells[v].variant);
      continue;
    }
    EqualEffectsRow row;
    row.variant = report->rows.front().cells[v].variant;
    row.test = equal_effects_test(tau, se, df);
    report->equal_effects.push_back(std::move(row));
  }
}

void add_overall(AnalysisReport* report) {
  if (report->rows.empty()) return;
  const size_t n_var = report->rows.front().cells.size();
  std::vector<SubgroupEstimate> ests;
  for (const auto& row : report->rows) ests.push_back(row.est);
  for (size_t v = 0; v < n_var; ++v) {
    std::vector<double> vars, dfs;
    for (const auto& row : report->rows) {
      vars.push_back(row.cells[v].variance);
      dfs.push_back(row.cells[v].df);
    }
    OverallRow row;
    row.variant = report->rows.front().cells[v].variant;
    row.estimate = poststratified_overall(ests, vars, dfs);
    row.test = subgroup_test(row.estimate.tau_hat, std::sqrt(row.estimate.variance),
                             row.estimate.df, 0.0, report->alpha);
    report->overall.push_back(std::move(row));
  }
}

}  // namespace

std::vector<std::string> known_variants_for_route(const std::string& route) {
  if (route == "simple")
    return {"db_actual",    "db_expected",   "hw",           "fs",
            "db_actual_bm", "db_actual_phi", "db_actual_het", "db_actual_r2"};
  if (route == "nonresponse") return {"db_actual", "db_expected", "hw"};
  if (route == "blocked" || route == "blocked_clustered")
    return {"db_actual",    "db_expected",   "db_actual_bm",
            "db_actual_phi", "db_actual_het", "db_actual_r2"};
  if (route == "clustered" || route == "cluster_subgroups")
    return {"db_actual", "db_expected", "crse"};
  throw DomainError("unknown analysis route '" + route + "'");
}

TrialFrame aggregate_clusters(const TrialFrame& frame) {
  if (!frame.design.clustered())
    throw DomainError("cluster aggregation needs a clustered design");

  struct Cell {
    double wsum = 0.0;
    double ysum = 0.0;
    Eigen::VectorXd xsum;
    int t = -1;
    int block = -1;
    long members = 0;
  };
  std::map<std::pair<int, int>, Cell> cells;  // (cluster, subgroup)
  for (int i = 0; i < frame.n; ++i) {
    if (!frame.in_sample(i)) continue;
    const auto u = static_cast<size_t>(i);
    auto& cell = cells[{frame.cluster[u], frame.g[u]}];
    const double w = frame.has_response() ? frame.w_r[i] : 1.0;
    cell.wsum += w;
    cell.ysum += w * frame.y[i];
    if (cell.xsum.size() == 0) cell.xsum = Eigen::VectorXd::Zero(frame.V);
    for (int v = 0; v < frame.V; ++v) cell.xsum[v] += w * frame.x(i, v);
    cell.t = frame.t[u];
    cell.block = frame.block.empty() ? -1 : frame.block[u];
    cell.members += 1;
  }
  if (cells.empty()) throw EstimationError("no estimable cluster cells");

  const bool weight_by_size =
      frame.design.cluster_weighting == ClusterWeighting::SubgroupSize;
  TrialFrame out;
  out.n = static_cast<int>(cells.size());
  out.K = frame.K;
  out.V = frame.V;
  out.y.resize(out.n);
  out.t.resize(static_cast<size_t>(out.n));
  out.g.resize(static_cast<size_t>(out.n));
  if (!frame.block.empty()) out.block.resize(static_cast<size_t>(out.n));
  out.x.resize(out.n, frame.V);
  out.design = frame.design;
  out.design.structure = frame.design.blocked() ? Structure::Blocked : Structure::Simple;
  out.subgroup_labels = frame.subgroup_labels;
  out.block_labels = frame.block_labels;
  out.covariate_names = frame.covariate_names;
  if (weight_by_size) {
    out.responded.assign(static_cast<size_t>(out.n), 1);
    out.w_r.resize(out.n);
  }
  int r = 0;
  for (const auto& [key, cell] : cells) {
    out.y[r] = cell.ysum / cell.wsum;
    out.t[static_cast<size_t>(r)] = static_cast<int8_t>(cell.t);
    out.g[static_cast<size_t>(r)] = key.second;
    if (!out.block.empty()) out.block[static_cast<size_t>(r)] = cell.block;
    for (int v = 0; v < frame.V; ++v) out.x(r, v) = cell.xsum[v] / cell.wsum;
    if (weight_by_size) out.w_r[r] = cell.wsum;
    ++r;
  }
  return out;
}

AnalysisReport run_analysis(const Dataset& dataset, const AnalyzeOptions& options) {
  AnalysisReport report;
  report.alpha = options.alpha;
  report.route = route_for(dataset, options);
  check_variants(options.variants, report.route);

  for (const auto& v : validate(dataset)) {
    if (v.severity == Violation::Severity::Error)
      throw ConfigError("dataset check '" + v.code + "' failed: " + v.message);
    report.warnings.push_back(v);
  }

  const TrialFrame frame = to_frame(dataset);
  report.subgroup_labels = frame.subgroup_labels;
  report.block_labels = frame.block_labels;

  ModelSpec spec;
  spec.covariates = options.covariates;
  spec.centering = options.centering;

  auto attach_cells = [&](SubgroupRow& row,
                          const std::function<VarResult(const std::string&)>& menu) {
    for (const auto& name : options.variants) {
      VarResult var;
      try {
        var = menu(name);
      } catch (const EstimationError& e) {
        // A warned-about cell (singleton arm, too few clusters) keeps its
        // point estimate; the variance slot degrades with the reason.
        var.variance = std::numeric_limits<double>::quiet_NaN();
        var.df = std::numeric_limits<double>::quiet_NaN();
        var.notes.push_back(e.code());
      }
      row.cells.push_back(make_cell(name, row.est.tau_hat, var, options.alpha));
    }
  };

  if (report.route == "simple") {
    const FittedModel model = fit_model(frame, spec);
    auto ests = subgroup_estimates(
        frame, model, options.covariates == CovariateForm::None ? "diff_in_means"
                                                                : "adjusted");
    for (auto& est : ests) {
      SubgroupRow row;
      row.est = est;
      attach_cells(row, [&](const std::string& name) {
        if (name == "hw") return var_huber_white(model, est.subgroup);
        if (name == "fs")
          return var_finite_sample(model, est.subgroup, options_for(name));
        return var_design_based(model, est.subgroup, options_for(name));
      });
      report.rows.push_back(std::move(row));
    }
    for (int k = 0; k < frame.K; ++k)
      report.diff_means.push_back(diff_in_means(frame, k));
  } else if (report.route == "nonresponse") {
    const NonresponseResult res = nonresponse_weighted(frame, spec);
    for (const auto& est : res.estimates) {
      SubgroupRow row;
      row.est = est;
      attach_cells(row, [&](const std::string& name) {
        if (name == "hw") return var_huber_white(res.model, est.subgroup);
        return var_nonresponse(res, est.subgroup, options_for(name));
      });
      report.rows.push_back(std::move(row));
    }
  } else if (report.route == "blocked" || report.route == "blocked_clustered") {
    spec.blocked = true;
    TrialFrame fit_frame = frame;
    if (report.route == "blocked_clustered") {
      fit_frame = aggregate_clusters(frame);
      report.notes.push_back("cluster_cells_within_blocks");
    }
    const FittedModel model = fit_model(fit_frame, spec);
    BlockedEstimates blocked = blocked_estimates(fit_frame, model);
    report.per_block = blocked.per_block;
    report.excluded_cells = model.design.excluded_cells;
    for (const auto& est : blocked.pooled) {
      SubgroupRow row;
      row.est = est;
      attach_cells(row, [&](const std::string& name) {
        return var_blocked(model, est.subgroup, options_for(name)).pooled;
      });
      report.rows.push_back(std::move(row));
    }
    if (options.restricted)
      report.restricted = blocked_restricted(fit_frame, model);
  } else {  // clustered | cluster_subgroups
    const ClusteredResult res = options.cluster_subgroups
                                    ? clustered_cluster_level(frame, spec)
                                    : clustered_individual(frame, spec);
    for (const auto& est : res.estimates) {
      SubgroupRow row;
      row.est = est;
      attach_cells(row, [&](const std::string& name) {
        if (name == "crse") return var_crse(res, est.subgroup);
        VarianceOptions o = options_for(name);
        if (options.cluster_subgroups)
          return var_cluster_level_subgroup(res, est.subgroup, o);
        return var_cluster_design_based(res, est.subgroup, o);
      });
      report.rows.push_back(std::move(row));
    }
  }

  if (options.equal_effects) add_equal_effects(&report);
  if (options.overall) add_overall(&report);
  return report;
}

}  // namespace subrct

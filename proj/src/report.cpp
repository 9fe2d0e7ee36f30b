#include "subrct/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "subrct/errors.hpp"

namespace subrct {

const char* kVersion = "0.1.0";

namespace {

using nlohmann::json;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.10g", x);
  return buffer;
}

json number_or_string(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json test_json(const TestResult& t) {
  json out;
  out["kind"] = to_string(t.kind);
  out["statistic"] = number_or_string(t.statistic);
  out["df1"] = number_or_string(t.df1);
  if (t.kind == TestKind::F) out["df2"] = number_or_string(t.df2);
  out["p_value"] = number_or_string(t.p_value);
  if (t.degenerate) out["degenerate"] = true;
  return out;
}

json estimate_json(const SubgroupEstimate& e, const std::string& label) {
  json out;
  out["subgroup"] = label;
  out["kind"] = e.kind;
  out["tau_hat"] = e.tau_hat;
  out["n_k"] = e.n_k;
  out["n_k1"] = e.n_k1;
  out["n_k0"] = e.n_k0;
  out["pi_k"] = e.pi_k;
  return out;
}

}  // namespace

std::string analysis_json(const AnalysisReport& report,
                          const std::map<std::string, std::string>& resolved_config) {
  json out;
  out["version"] = kVersion;
  out["command"] = "analyze";
  out["route"] = report.route;
  out["alpha"] = report.alpha;
  out["config"] = resolved_config;

  out["subgroups"] = json::array();
  for (const auto& row : report.rows) {
    json r = estimate_json(row.est, row.est.label);
    r["variants"] = json::array();
    for (const auto& cell : row.cells) {
      json c;
      c["variant"] = cell.variant;
      c["variance"] = number_or_string(cell.variance);
      c["se"] = number_or_string(cell.se);
      c["df"] = number_or_string(cell.df);
      c["ci_lo"] = number_or_string(cell.ci_lo);
      c["ci_hi"] = number_or_string(cell.ci_hi);
      c["p_value"] = number_or_string(cell.p_value);
      if (cell.clamped) c["clamped"] = true;
      if (!cell.notes.empty()) c["notes"] = cell.notes;
      r["variants"].push_back(std::move(c));
    }
    out["subgroups"].push_back(std::move(r));
  }

  if (!report.equal_effects.empty()) {
    out["equal_effects"] = json::array();
    for (const auto& row : report.equal_effects) {
      json r;
      r["variant"] = row.variant;
      r["statistic"] = number_or_string(row.test.statistic);
      r["chi_squared"] = test_json(row.test.chi_squared);
      r["f"] = test_json(row.test.f);
      out["equal_effects"].push_back(std::move(r));
    }
  }

  if (!report.overall.empty()) {
    out["overall"] = json::array();
    for (const auto& row : report.overall) {
      json r;
      r["variant"] = row.variant;
      r["tau_hat"] = row.estimate.tau_hat;
      r["variance"] = number_or_string(row.estimate.variance);
      r["df"] = number_or_string(row.estimate.df);
      r["ci_lo"] = number_or_string(row.test.ci_lo);
      r["ci_hi"] = number_or_string(row.test.ci_hi);
      r["p_value"] = number_or_string(row.test.test.p_value);
      out["overall"].push_back(std::move(r));
    }
  }

  if (!report.diff_means.empty()) {
    out["diff_in_means"] = json::array();
    for (const auto& e : report.diff_means)
      out["diff_in_means"].push_back(estimate_json(e, e.label));
  }
  if (!report.restricted.empty()) {
    out["restricted_pooled"] = json::array();
    for (const auto& e : report.restricted)
      out["restricted_pooled"].push_back(estimate_json(e, e.label));
  }
  if (!report.per_block.empty()) {
    out["blocks"] = json::array();
    for (const auto& b : report.per_block) {
      json r;
      r["block"] = report.block_labels[static_cast<size_t>(b.block)];
      r["subgroup"] = report.subgroup_labels[static_cast<size_t>(b.subgroup)];
      r["tau_hat"] = b.tau_hat;
      r["n_bk"] = b.n_bk;
      r["n_bk1"] = b.n_bk1;
      r["n_bk0"] = b.n_bk0;
      out["blocks"].push_back(std::move(r));
    }
  }
  if (!report.excluded_cells.empty()) {
    out["excluded_cells"] = json::array();
    for (const auto& [b, k] : report.excluded_cells) {
      json r;
      r["block"] = report.block_labels[static_cast<size_t>(b)];
      r["subgroup"] = report.subgroup_labels[static_cast<size_t>(k)];
      out["excluded_cells"].push_back(std::move(r));
    }
  }
  if (!report.warnings.empty()) {
    out["warnings"] = json::array();
    for (const auto& w : report.warnings) {
      json r;
      r["code"] = w.code;
      r["context"] = w.context;
      r["message"] = w.message;
      out["warnings"].push_back(std::move(r));
    }
  }
  if (!report.notes.empty()) out["notes"] = report.notes;
  return out.dump(2) + "\n";
}

std::string analysis_csv(const AnalysisReport& report) {
  std::ostringstream out;
  out << "subgroup,kind,n_k,n_k1,n_k0,pi_k,tau_hat,variant,se,df,ci_lo,ci_hi,"
         "p_value\n";
  for (const auto& row : report.rows) {
    for (const auto& cell : row.cells) {
      out << row.est.label << ',' << row.est.kind << ',' << row.est.n_k << ','
          << row.est.n_k1 << ',' << row.est.n_k0 << ',' << fmt(row.est.pi_k) << ','
          << fmt(row.est.tau_hat) << ',' << cell.variant << ',' << fmt(cell.se)
          << ',' << fmt(cell.df) << ',' << fmt(cell.ci_lo) << ','
          << fmt(cell.ci_hi) << ',' << fmt(cell.p_value) << '\n';
    }
  }
  return out.str();
}

std::string simulation_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "n,pi1,p,v,error_dist,n_draws,n_reps,seed,variant,bias,true_se,"
         "mean_est_se,coverage,type1_t,type1_f,type1_chisq,total_rejects\n";
  const SimConfig& c = report.config;
  for (const auto& row : report.rows) {
    out << c.n << ',' << fmt(c.pi1) << ',' << fmt(c.p) << ',' << c.v << ','
        << to_string(c.error_dist) << ',' << c.n_draws << ',' << c.n_reps << ','
        << c.seed << ',' << row.variant << ',' << fmt(row.bias) << ','
        << fmt(row.true_se) << ',' << fmt(row.mean_est_se) << ','
        << fmt(row.coverage) << ',' << fmt(row.type1_t) << ','
        << fmt(row.type1_f) << ',' << fmt(row.type1_chisq) << ','
        << report.total_rejects << '\n';
  }
  return out.str();
}

std::string simulation_json(const SimulationReport& report,
                            const std::map<std::string, std::string>& resolved_config) {
  json out;
  out["version"] = kVersion;
  out["command"] = "simulate";
  out["config"] = resolved_config;
  out["seed"] = report.config.seed;
  out["rows"] = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["variant"] = row.variant;
    r["bias"] = row.bias;
    r["true_se"] = row.true_se;
    r["mean_est_se"] = row.mean_est_se;
    r["coverage"] = row.coverage;
    r["type1_t"] = row.type1_t;
    r["type1_f"] = row.type1_f;
    r["type1_chisq"] = row.type1_chisq;
    out["rows"].push_back(std::move(r));
  }
  out["tau1_by_draw"] = report.tau1_by_draw;
  out["tau2_by_draw"] = report.tau2_by_draw;
  out["rejects_by_draw"] = report.rejects_by_draw;
  out["total_rejects"] = report.total_rejects;
  return out.dump(2) + "\n";
}

ProbeResult run_probe(const ProbeConfig& config) {
  AllocationLaw law{config.n, config.n1, config.n_k};
  ProbeResult result;
  result.split_probability = design_math::split_probability(law);

  std::vector<double> c_grid = config.c_grid;
  if (c_grid.empty())
    for (int i = 1; i <= 20; ++i) c_grid.push_back(0.05 * i);
  result.panel_a = design_math::relative_deviation_curve(law, config.arm, c_grid);

  if (config.delta_steps < 2) throw ConfigError("delta_steps must be at least 2");
  const double lim = config.delta_frac * config.panel_b_n_k * config.panel_b_p;
  std::vector<double> deltas;
  for (int i = 0; i < config.delta_steps; ++i)
    deltas.push_back(-lim + 2.0 * lim * i / (config.delta_steps - 1));
  result.panel_b = design_math::se_ratio_curve(config.panel_b_n_k, config.panel_b_p,
                                               deltas, config.phi_var,
                                               config.theta_het);
  result.max_ratio = result.panel_b.front().value;
  result.min_ratio = result.panel_b.front().value;
  for (const auto& pt : result.panel_b) {
    result.max_ratio = std::max(result.max_ratio, pt.value);
    result.min_ratio = std::min(result.min_ratio, pt.value);
  }
  return result;
}

std::string probe_panel_a_csv(const ProbeResult& result) {
  std::ostringstream out;
  out << "c,probability\n";
  for (const auto& pt : result.panel_a)
    out << fmt(pt.x) << ',' << fmt(pt.value) << '\n';
  return out.str();
}

std::string probe_panel_b_csv(const ProbeResult& result) {
  std::ostringstream out;
  out << "delta1,se_ratio\n";
  for (const auto& pt : result.panel_b)
    out << fmt(pt.x) << ',' << fmt(pt.value) << '\n';
  return out.str();
}

std::string probe_summary_csv(const ProbeResult& result) {
  std::ostringstream out;
  out << "quantity,value\n";
  out << "split_probability," << fmt(result.split_probability) << '\n';
  out << "max_se_ratio," << fmt(result.max_ratio) << '\n';
  out << "min_se_ratio," << fmt(result.min_ratio) << '\n';
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing file '" + path + "'");
}

}  // namespace subrct

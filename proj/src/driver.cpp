#include "subrct/driver.hpp"

#include <cstdio>
#include <map>

#include "subrct/analysis.hpp"
#include "subrct/config.hpp"
#include "subrct/data_model.hpp"
#include "subrct/errors.hpp"
#include "subrct/report.hpp"
#include "subrct/simulation.hpp"

namespace subrct {

namespace {

std::string fmt_real(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.10g", x);
  return buffer;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ",";
    out += s;
  }
  return out;
}

// Design rates: explicit config keys win, otherwise the realized assignment
// shares are used (exact under complete randomization) and noted.
std::string resolve_rates(Dataset* dataset, KeyValueConfig* cfg,
                          std::map<std::string, std::string>* resolved) {
  std::string note;
  DesignSpec design = dataset->design;
  if (design.blocked()) {
    auto rates = cfg->get_real_group("rate");
    if (rates.empty()) {
      std::map<std::string, std::pair<long, long>> counts;
      for (const auto& rec : dataset->records) {
        auto& c = counts[rec.block];
        c.second += 1;
        if (rec.t == 1) c.first += 1;
      }
      for (const auto& [label, c] : counts)
        design.block_p[label] =
            static_cast<double>(c.first) / static_cast<double>(c.second);
      note = "realized_block_rates";
    } else {
      for (const auto& label : dataset->block_levels) {
        auto it = rates.find(label);
        if (it == rates.end())
          throw ConfigError("no rate.<block> key for block '" + label + "'");
        design.block_p[label] = it->second;
      }
    }
    for (const auto& [label, rate] : design.block_p)
      (*resolved)["rate." + label] = fmt_real(rate);
  } else {
    if (cfg->has("p")) {
      design.p = cfg->get_real("p", 0.5);
    } else {
      long treated = 0;
      for (const auto& rec : dataset->records) treated += rec.t == 1 ? 1 : 0;
      design.p = static_cast<double>(treated) / static_cast<double>(dataset->n());
      note = "realized_rate";
    }
    (*resolved)["p"] = fmt_real(design.p);
  }
  *dataset = Dataset::build(dataset->records, design, dataset->covariate_names,
                            dataset->has_response);
  return note;
}

AnalyzeArtifacts run_analyze_config(KeyValueConfig cfg, bool from_file,
                                    const std::string& data, const std::string& label) {
  std::map<std::string, std::string> resolved;
  resolved["data"] = label;

  CsvSchema schema;
  schema.y = cfg.require_string("outcome");
  schema.t = cfg.require_string("treatment");
  schema.subgroup = cfg.require_string("subgroup");
  schema.id = cfg.get_string("id", "");
  schema.block = cfg.get_string("block", "");
  schema.cluster = cfg.get_string("cluster", "");
  schema.responded = cfg.get_string("responded", "");
  schema.weight = cfg.get_string("weight", "");
  schema.covariates = cfg.get_list("covariates", {});
  resolved["outcome"] = schema.y;
  resolved["treatment"] = schema.t;
  resolved["subgroup"] = schema.subgroup;
  if (!schema.id.empty()) resolved["id"] = schema.id;
  if (!schema.block.empty()) resolved["block"] = schema.block;
  if (!schema.cluster.empty()) resolved["cluster"] = schema.cluster;
  if (!schema.responded.empty()) resolved["responded"] = schema.responded;
  if (!schema.weight.empty()) resolved["weight"] = schema.weight;
  if (!schema.covariates.empty()) resolved["covariates"] = join(schema.covariates);

  DesignSpec design;
  std::string structure = cfg.get_string("structure", "");
  if (structure.empty()) {
    const bool has_block = !schema.block.empty();
    const bool has_cluster = !schema.cluster.empty();
    structure = has_block && has_cluster ? "blocked_clustered"
                : has_block              ? "blocked"
                : has_cluster            ? "clustered"
                                         : "simple";
  }
  design.structure = structure_from_string(structure);
  design.mechanism = mechanism_from_string(cfg.get_string("mechanism", "complete"));
  design.cluster_weighting =
      cluster_weighting_from_string(cfg.get_string("weighting", "subgroup_size"));
  resolved["structure"] = structure;
  resolved["mechanism"] = to_string(design.mechanism);
  if (design.clustered())
    resolved["weighting"] = to_string(design.cluster_weighting);

  Dataset dataset = from_file ? read_csv(data, schema, design)
                              : read_csv_string(data, schema, design);
  const std::string rate_note = resolve_rates(&dataset, &cfg, &resolved);

  AnalyzeOptions options;
  const std::string model = cfg.get_string(
      "covariate_model", schema.covariates.empty() ? "none" : "pooled");
  if (model == "none")
    options.covariates = CovariateForm::None;
  else if (model == "pooled")
    options.covariates = CovariateForm::Pooled;
  else if (model == "interacted")
    options.covariates = CovariateForm::InteractedBySubgroupAndArm;
  else
    throw ConfigError("covariate_model must be none, pooled or interacted");
  if (options.covariates != CovariateForm::None && schema.covariates.empty())
    throw ConfigError("covariate_model '" + model + "' needs a covariates list");
  const std::string centering = cfg.get_string("centering", "centered");
  if (centering == "centered")
    options.centering = Centering::Centered;
  else if (centering == "raw")
    options.centering = Centering::Raw;
  else
    throw ConfigError("centering must be centered or raw");
  options.alpha = cfg.get_real("alpha", 0.05);
  options.equal_effects = cfg.get_bool("equal_effects", true);
  options.overall = cfg.get_bool("overall", false);
  options.restricted = cfg.get_bool("restricted", false);
  options.cluster_subgroups = cfg.get_bool("cluster_subgroups", false);

  std::string route = "simple";
  if (design.structure == Structure::BlockedClustered)
    route = "blocked_clustered";
  else if (design.structure == Structure::Clustered)
    route = options.cluster_subgroups ? "cluster_subgroups" : "clustered";
  else if (design.structure == Structure::Blocked)
    route = "blocked";
  else if (dataset.has_response)
    route = "nonresponse";
  std::vector<std::string> menu = known_variants_for_route(route);
  if (options.covariates == CovariateForm::None) {
    // the collinearity-adjusted variant needs covariates; drop it from the
    // default menu so an unadjusted run works out of the box
    std::erase(menu, "db_actual_r2");
  }
  options.variants = cfg.get_list("variants", menu);

  const std::string format = cfg.get_string("format", "both");
  if (format != "json" && format != "csv" && format != "both")
    throw ConfigError("format must be json, csv or both");
  cfg.require_consumed();

  resolved["covariate_model"] = model;
  resolved["centering"] = centering;
  resolved["alpha"] = fmt_real(options.alpha);
  resolved["variants"] = join(options.variants);
  resolved["equal_effects"] = options.equal_effects ? "true" : "false";
  resolved["overall"] = options.overall ? "true" : "false";
  resolved["restricted"] = options.restricted ? "true" : "false";
  resolved["cluster_subgroups"] = options.cluster_subgroups ? "true" : "false";
  resolved["format"] = format;
  resolved["version"] = kVersion;

  AnalysisReport report = run_analysis(dataset, options);
  if (!rate_note.empty()) report.notes.push_back(rate_note);

  AnalyzeArtifacts out;
  out.json = analysis_json(report, resolved);
  out.csv = analysis_csv(report);
  out.format = format;
  return out;
}

SimConfig parse_sim_config(KeyValueConfig* cfg) {
  SimConfig config;
  config.n = cfg->get_int("n", config.n);
  config.pi1 = cfg->get_real("pi1", config.pi1);
  config.p = cfg->get_real("p", config.p);
  config.v = static_cast<int>(cfg->get_int("v", config.v));
  config.n_draws = static_cast<int>(cfg->get_int("draws", config.n_draws));
  config.n_reps = cfg->get_int("reps", config.n_reps);
  config.error_dist = error_dist_from_string(cfg->get_string("error_dist", "normal"));
  config.variance_variants =
      cfg->get_list("variants", {"db_actual", "db_expected", "hw"});
  config.seed = cfg->get_uint64("seed", 0);
  config.alpha = cfg->get_real("alpha", 0.05);
  cfg->require_consumed();
  validate(config);
  return config;
}

SimulateArtifacts run_simulate_config(KeyValueConfig cfg, int threads) {
  const SimConfig config = parse_sim_config(&cfg);

  std::map<std::string, std::string> resolved;
  resolved["n"] = std::to_string(config.n);
  resolved["pi1"] = fmt_real(config.pi1);
  resolved["p"] = fmt_real(config.p);
  resolved["v"] = std::to_string(config.v);
  resolved["draws"] = std::to_string(config.n_draws);
  resolved["reps"] = std::to_string(config.n_reps);
  resolved["error_dist"] = to_string(config.error_dist);
  resolved["variants"] = join(config.variance_variants);
  resolved["seed"] = std::to_string(config.seed);
  resolved["alpha"] = fmt_real(config.alpha);
  resolved["threads"] = std::to_string(threads);
  resolved["version"] = kVersion;

  const SimulationReport report = run_simulation(config, threads);
  SimulateArtifacts out;
  out.csv = simulation_csv(report);
  out.json = simulation_json(report, resolved);
  return out;
}

ProbeArtifacts run_probe_config(KeyValueConfig cfg) {
  ProbeConfig config;
  config.n = cfg.get_int("n", config.n);
  config.n1 = cfg.get_int("n1", config.n1);
  config.n_k = cfg.get_int("n_k", config.n_k);
  config.arm = static_cast<int>(cfg.get_int("arm", config.arm));
  for (const auto& c : cfg.get_list("c_grid", {})) {
    try {
      config.c_grid.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw ConfigError("c_grid entry '" + c + "' is not a number");
    }
  }
  config.panel_b_n_k = cfg.get_real("b_n_k", config.panel_b_n_k);
  config.panel_b_p = cfg.get_real("b_p", config.panel_b_p);
  config.phi_var = cfg.get_real("phi_var", config.phi_var);
  config.theta_het = cfg.get_real("theta_het", config.theta_het);
  config.delta_frac = cfg.get_real("delta_frac", config.delta_frac);
  config.delta_steps =
      static_cast<int>(cfg.get_int("delta_steps", config.delta_steps));
  cfg.require_consumed();

  const ProbeResult result = run_probe(config);
  ProbeArtifacts out;
  out.panel_a = probe_panel_a_csv(result);
  out.panel_b = probe_panel_b_csv(result);
  out.summary = probe_summary_csv(result);
  return out;
}

}  // namespace

AnalyzeArtifacts analyze_from_text(const std::string& csv_text,
                                   const std::string& config_text,
                                   const std::string& data_label) {
  return run_analyze_config(KeyValueConfig::parse_string(config_text), false,
                            csv_text, data_label);
}

AnalyzeArtifacts analyze_from_files(const std::string& data_path,
                                    const std::string& config_path) {
  return run_analyze_config(KeyValueConfig::parse_file(config_path), true, data_path,
                            data_path);
}

SimulateArtifacts simulate_from_text(const std::string& config_text, int threads) {
  return run_simulate_config(KeyValueConfig::parse_string(config_text), threads);
}

SimulateArtifacts simulate_from_file(const std::string& config_path, int threads) {
  return run_simulate_config(KeyValueConfig::parse_file(config_path), threads);
}

ProbeArtifacts probe_from_text(const std::string& config_text) {
  return run_probe_config(KeyValueConfig::parse_string(config_text));
}

ProbeArtifacts probe_from_file(const std::string& config_path) {
  return run_probe_config(KeyValueConfig::parse_file(config_path));
}

}  // namespace subrct

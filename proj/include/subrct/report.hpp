#pragma once

#include <map>
#include <string>

#include "subrct/analysis.hpp"
#include "subrct/design_math.hpp"
#include "subrct/simulation.hpp"

namespace subrct {

extern const char* kVersion;

// Analysis reports: full JSON plus a flat subgroup x variant CSV.
std::string analysis_json(const AnalysisReport& report,
                          const std::map<std::string, std::string>& resolved_config);
std::string analysis_csv(const AnalysisReport& report);

// Simulation reports: one CSV row per variance variant, metadata in JSON.
std::string simulation_csv(const SimulationReport& report);
std::string simulation_json(const SimulationReport& report,
                            const std::map<std::string, std::string>& resolved_config);

// Probe outputs for the design-math curves.
struct ProbeConfig {
  long long n = 40;
  long long n1 = 20;
  long long n_k = 12;
  int arm = 1;
  std::vector<double> c_grid;       // deviation thresholds, panel A
  double panel_b_n_k = 50.0;
  double panel_b_p = 0.5;
  double phi_var = 1.1;
  double theta_het = 0.05;
  double delta_frac = 0.2;          // |delta1| <= delta_frac * n_k * p
  int delta_steps = 41;
};

struct ProbeResult {
  std::vector<design_math::CurvePoint> panel_a;
  std::vector<design_math::CurvePoint> panel_b;
  double split_probability = 0.0;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
};

ProbeResult run_probe(const ProbeConfig& config);

std::string probe_panel_a_csv(const ProbeResult& result);
std::string probe_panel_b_csv(const ProbeResult& result);
std::string probe_summary_csv(const ProbeResult& result);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace subrct

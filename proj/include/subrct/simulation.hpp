#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subrct/variance.hpp"

namespace subrct {

enum class ErrorDist { Normal, ChiSquaredMatched };

std::string to_string(ErrorDist dist);
ErrorDist error_dist_from_string(const std::string& s);

struct SimConfig {
  long n = 100;
  double pi1 = 0.5;  // share of units in subgroup 1
  double p = 0.5;
  int v = 0;  // 0 or 2 covariates
  int n_draws = 5;
  long n_reps = 10000;
  ErrorDist error_dist = ErrorDist::Normal;
  std::vector<std::string> variance_variants;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  long max_rejects = 1000000;
  // test hook: zero out every unit effect so both subgroup effects are exactly 0
  bool force_zero_effects = false;
};

void validate(const SimConfig& config);

// One draw of fixed potential outcomes. Unit-level effects are kept so the
// subgroup effects stay recomputable exactly.
struct FinitePopulation {
  long n = 0;
  std::vector<int> g;  // 0 or 1
  std::vector<double> y0, y1;
  std::vector<double> x1, x2;
  std::vector<double> e, theta;
  double tau[2] = {0.0, 0.0};  // realized subgroup mean effects
};

FinitePopulation generate_population(const SimConfig& config, int draw);

// Complete randomization of n*p units into treatment, redrawn until every
// (subgroup, arm) cell has at least two units. Returns the 0/1 assignment
// and adds the number of discarded draws to *rejects.
std::vector<int> draw_assignment(const FinitePopulation& pop, const SimConfig& config,
                                 int draw, long rep, long* rejects);

struct VariantMetrics {
  std::string variant;
  double bias = 0.0;
  double true_se = 0.0;
  double mean_est_se = 0.0;
  double coverage = 0.0;
  double type1_t = 0.0;
  double type1_f = 0.0;
  double type1_chisq = 0.0;
};

struct SimulationReport {
  SimConfig config;
  std::vector<VariantMetrics> rows;
  std::vector<double> tau1_by_draw, tau2_by_draw;
  std::vector<long> rejects_by_draw;
  long total_rejects = 0;
};

// Runs n_draws populations x n_reps assignments and averages the per-draw
// metrics. Bit-identical output for any thread count: per-rep records are
// stored by rep index and reduced sequentially.
SimulationReport run_simulation(const SimConfig& config, int threads = 0);

const std::vector<std::string>& known_sim_variants();

}  // namespace subrct

#include "subrct/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "subrct/design_math.hpp"
#include "subrct/errors.hpp"
#include "subrct/estimators.hpp"
#include "subrct/rng.hpp"
#include "subrct/stats.hpp"

namespace subrct {

std::string to_string(ErrorDist dist) {
  return dist == ErrorDist::Normal ? "normal" : "chi_squared";
}

ErrorDist error_dist_from_string(const std::string& s) {
  if (s == "normal") return ErrorDist::Normal;
  if (s == "chi_squared") return ErrorDist::ChiSquaredMatched;
  throw ConfigError("unknown error_dist '" + s + "' (normal, chi_squared)");
}

const std::vector<std::string>& known_sim_variants() {
  static const std::vector<std::string> v = {
      "db_actual",     "db_expected",   "hw",           "fs",
      "db_actual_bm",  "db_actual_phi", "db_actual_het", "db_actual_r2"};
  return v;
}

namespace {

bool integral(double x) { return std::fabs(x - std::round(x)) < 1e-9; }

}  // namespace

void validate(const SimConfig& config) {
  if (config.n < 8) throw ConfigError("simulation n must be at least 8");
  if (!(config.p > 0.0 && config.p < 1.0))
    throw ConfigError("simulation p must lie in (0, 1)");
  if (!integral(config.n * config.p))
    throw ConfigError("n * p must be an integer");
  if (!(config.pi1 > 0.0 && config.pi1 < 1.0))
    throw ConfigError("pi1 must lie in (0, 1)");
  if (!integral(config.n * config.pi1))
    throw ConfigError("n * pi1 must be an integer");
  if (config.v != 0 && config.v != 2)
    throw ConfigError("the simulation model uses v = 0 or v = 2 covariates");
  if (config.n_draws < 1) throw ConfigError("n_draws must be positive");
  if (config.n_reps < 1) throw ConfigError("n_reps must be positive");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw ConfigError("alpha must lie in (0, 1)");
  if (config.variance_variants.empty())
    throw ConfigError("at least one variance variant is required");
  const auto& known = known_sim_variants();
  for (const auto& v : config.variance_variants) {
    if (std::find(known.begin(), known.end(), v) == known.end())
      throw ConfigError("unknown variance variant '" + v + "'");
    if (v == "db_actual_r2" && config.v == 0)
      throw ConfigError("db_actual_r2 requires covariates (v = 2)");
  }
}

FinitePopulation generate_population(const SimConfig& config, int draw) {
  FinitePopulation pop;
  pop.n = config.n;
  const long n1_units = std::lround(config.n * config.pi1);
  pop.g.resize(static_cast<size_t>(config.n));
  pop.y0.resize(static_cast<size_t>(config.n));
  pop.y1.resize(static_cast<size_t>(config.n));
  pop.x1.resize(static_cast<size_t>(config.n));
  pop.x2.resize(static_cast<size_t>(config.n));
  pop.e.resize(static_cast<size_t>(config.n));
  pop.theta.resize(static_cast<size_t>(config.n));

  RngStream rng(config.seed, static_cast<uint32_t>(draw), 0, 0);
  const bool chi = config.error_dist == ErrorDist::ChiSquaredMatched;
  auto noise = [&]() {
    const double z = rng.normal();
    // 1-df chi-squared, standardized to mean 0 and variance 1
    return chi ? (z * z - 1.0) / std::sqrt(2.0) : z;
  };

  double sum[2] = {0.0, 0.0};
  long cnt[2] = {0, 0};
  for (long i = 0; i < config.n; ++i) {
    const auto u = static_cast<size_t>(i);
    const int k = i < n1_units ? 0 : 1;
    pop.g[u] = k;
    pop.x1[u] = noise();
    pop.x2[u] = noise();
    pop.e[u] = noise();
    const double sd = k == 0 ? std::sqrt(0.5) : std::sqrt(0.4);
    pop.theta[u] = sd * rng.normal();
    // the hook still consumes the draw so x and e match the unforced stream
    if (config.force_zero_effects) pop.theta[u] = 0.0;
    const double base = k == 0 ? 1.0 + 0.4 * pop.x1[u] + 0.8 * pop.x2[u]
                               : 2.0 + 0.7 * pop.x1[u] + 0.5 * pop.x2[u];
    pop.y0[u] = base + pop.e[u];
    pop.y1[u] = pop.y0[u] + pop.theta[u];
    sum[k] += pop.theta[u];
    cnt[k] += 1;
  }
  pop.tau[0] = cnt[0] > 0 ? sum[0] / static_cast<double>(cnt[0]) : 0.0;
  pop.tau[1] = cnt[1] > 0 ? sum[1] / static_cast<double>(cnt[1]) : 0.0;
  return pop;
}

std::vector<int> draw_assignment(const FinitePopulation& pop, const SimConfig& config,
                                 int draw, long rep, long* rejects) {
  const long n = pop.n;
  const long n1 = std::lround(config.n * config.p);
  RngStream rng(config.seed, static_cast<uint32_t>(draw), 1,
                static_cast<uint32_t>(rep));
  std::vector<int> perm(static_cast<size_t>(n));
  std::vector<int> t(static_cast<size_t>(n));
  long local_rejects = 0;
  for (;;) {
    std::iota(perm.begin(), perm.end(), 0);
    for (long i = 0; i < n1; ++i) {
      const auto j = i + rng.uniform_below(static_cast<uint32_t>(n - i));
      std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }
    std::fill(t.begin(), t.end(), 0);
    for (long i = 0; i < n1; ++i) t[static_cast<size_t>(perm[static_cast<size_t>(i)])] = 1;
    long cell[2][2] = {{0, 0}, {0, 0}};
    for (long i = 0; i < n; ++i)
      cell[pop.g[static_cast<size_t>(i)]][t[static_cast<size_t>(i)]] += 1;
    if (cell[0][0] >= 2 && cell[0][1] >= 2 && cell[1][0] >= 2 && cell[1][1] >= 2)
      break;
    if (++local_rejects > config.max_rejects)
      throw ConfigError("assignment rejection limit exceeded; cells too small");
  }
  if (rejects) *rejects += local_rejects;
  return t;
}

namespace {

struct VariantPlan {
  std::string name;
  bool huber_white = false;
  bool finite_sample = false;
  VarianceOptions opts;
};

std::vector<VariantPlan> build_plans(const SimConfig& config) {
  std::vector<VariantPlan> plans;
  for (const auto& name : config.variance_variants) {
    VariantPlan plan;
    plan.name = name;
    if (name == "hw") {
      plan.huber_white = true;
    } else if (name == "fs") {
      plan.finite_sample = true;
    } else if (name == "db_expected") {
      plan.opts.basis = SizeBasis::Expected;
    } else if (name == "db_actual_bm") {
      plan.opts.df_rule = DfRule::BellMcCaffrey;
    } else if (name == "db_actual_phi") {
      plan.opts.phi_adjust = true;
    } else if (name == "db_actual_het") {
      plan.opts.heterogeneity_bound = true;
    } else if (name == "db_actual_r2") {
      plan.opts.r2_adjust = true;
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

// One record per replication; reduced sequentially by rep index so the
// aggregate is independent of how reps were scheduled.
struct RepRecord {
  double tau_hat[2] = {0.0, 0.0};
  std::vector<double> se;  // variant-major: [variant][subgroup]
  std::vector<double> df;
  long rejects = 0;
};

TrialFrame base_frame(const FinitePopulation& pop, const SimConfig& config) {
  TrialFrame frame;
  frame.n = static_cast<int>(pop.n);
  frame.K = 2;
  frame.V = config.v;
  frame.y.resize(frame.n);
  frame.t.assign(static_cast<size_t>(frame.n), 0);
  frame.g.assign(pop.g.begin(), pop.g.end());
  if (config.v == 2) {
    frame.x.resize(frame.n, 2);
    for (int i = 0; i < frame.n; ++i) {
      frame.x(i, 0) = pop.x1[static_cast<size_t>(i)];
      frame.x(i, 1) = pop.x2[static_cast<size_t>(i)];
    }
    frame.covariate_names = {"x1", "x2"};
  } else {
    frame.x.resize(frame.n, 0);
  }
  frame.design.mechanism = Mechanism::Complete;
  frame.design.structure = Structure::Simple;
  frame.design.p = config.p;
  frame.subgroup_labels = {"G1", "G2"};
  return frame;
}

}  // namespace

SimulationReport run_simulation(const SimConfig& config, int threads) {
  validate(config);
  const auto plans = build_plans(config);
  const size_t n_var = plans.size();

  SimulationReport report;
  report.config = config;
  report.rows.resize(n_var);
  for (size_t v = 0; v < n_var; ++v) report.rows[v].variant = plans[v].name;

  ModelSpec model_spec;
  model_spec.covariates = config.v > 0 ? CovariateForm::Pooled : CovariateForm::None;

  // Expected inverse arm sizes depend only on the counts; hoist them.
  const long n1_units = std::lround(config.n * config.pi1);
  const long treated = std::lround(config.n * config.p);
  double e_inv[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  const bool need_fs = std::any_of(plans.begin(), plans.end(),
                                   [](const VariantPlan& p) { return p.finite_sample; });
  if (need_fs) {
    for (int k = 0; k < 2; ++k) {
      const long n_k = k == 0 ? n1_units : config.n - n1_units;
      AllocationLaw law{config.n, treated, n_k};
      e_inv[k][1] = design_math::expected_inverse_arm_size(law, 1);
      e_inv[k][0] = design_math::expected_inverse_arm_size(law, 0);
    }
  }

  int n_threads = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(
      std::min<long>(n_threads, config.n_reps));

  std::vector<double> bias_d, truese_d;
  std::vector<std::vector<double>> meanse_d(n_var), cover_d(n_var), t1t_d(n_var),
      t1f_d(n_var), t1c_d(n_var);

  for (int draw = 0; draw < config.n_draws; ++draw) {
    const FinitePopulation pop = generate_population(config, draw);
    report.tau1_by_draw.push_back(pop.tau[0]);
    report.tau2_by_draw.push_back(pop.tau[1]);
    const TrialFrame base = base_frame(pop, config);

    std::vector<RepRecord> records(static_cast<size_t>(config.n_reps));
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&](long lo, long hi) {
      try {
        TrialFrame frame = base;
        for (long rep = lo; rep < hi; ++rep) {
          RepRecord& rec = records[static_cast<size_t>(rep)];
          const std::vector<int> t =
              draw_assignment(pop, config, draw, rep, &rec.rejects);
          for (int i = 0; i < frame.n; ++i) {
            const auto u = static_cast<size_t>(i);
            frame.t[u] = static_cast<int8_t>(t[u]);
            frame.y[i] = t[u] ? pop.y1[u] : pop.y0[u];
          }
          FittedModel model;
          try {
            model = fit_model(frame, model_spec);
          } catch (const Error& err) {
            throw EstimationError("replication",
                                  "draw " + std::to_string(draw) + " rep " +
                                      std::to_string(rep) + ": " + err.what());
          }
          for (int k = 0; k < 2; ++k) {
            const int c = model.design.cell_index(-1, k);
            rec.tau_hat[k] = tau_of_cell(model.design, model.fit,
                                         static_cast<size_t>(c));
          }
          rec.se.resize(n_var * 2);
          rec.df.resize(n_var * 2);
          for (size_t v = 0; v < n_var; ++v) {
            for (int k = 0; k < 2; ++k) {
              VarResult r;
              if (plans[v].huber_white) {
                r = var_huber_white(model, k);
              } else if (plans[v].finite_sample) {
                r = var_finite_sample(model, k, plans[v].opts, e_inv[k][1],
                                      e_inv[k][0]);
              } else {
                r = var_design_based(model, k, plans[v].opts);
              }
              rec.se[v * 2 + static_cast<size_t>(k)] = r.se();
              rec.df[v * 2 + static_cast<size_t>(k)] = r.df;
            }
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };

    if (n_threads == 1) {
      worker(0, config.n_reps);
    } else {
      std::vector<std::thread> pool;
      const long chunk = (config.n_reps + n_threads - 1) / n_threads;
      for (int w = 0; w < n_threads; ++w) {
        const long lo = w * chunk;
        const long hi = std::min<long>(lo + chunk, config.n_reps);
        if (lo >= hi) break;
        pool.emplace_back(worker, lo, hi);
      }
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Sequential reduction in rep order.
    const double tau1 = pop.tau[0];
    const double gap = pop.tau[0] - pop.tau[1];
    double sum_tau = 0.0, sumsq_tau = 0.0;
    long draw_rejects = 0;
    std::vector<double> sum_se(n_var, 0.0);
    std::vector<long> n_cover(n_var, 0), n_reject_t(n_var, 0), n_reject_f(n_var, 0),
        n_reject_c(n_var, 0);
    std::map<double, double> tq_cache;
    auto t_crit = [&](double df) {
      auto it = tq_cache.find(df);
      if (it != tq_cache.end()) return it->second;
      const double q = stats::t_quantile(1.0 - config.alpha / 2.0, df);
      tq_cache.emplace(df, q);
      return q;
    };
    for (long rep = 0; rep < config.n_reps; ++rep) {
      const RepRecord& rec = records[static_cast<size_t>(rep)];
      draw_rejects += rec.rejects;
      sum_tau += rec.tau_hat[0];
      sumsq_tau += (rec.tau_hat[0] - tau1) * (rec.tau_hat[0] - tau1);
      for (size_t v = 0; v < n_var; ++v) {
        const double se1 = rec.se[v * 2];
        const double se2 = rec.se[v * 2 + 1];
        const double df1 = rec.df[v * 2];
        const double df2 = rec.df[v * 2 + 1];
        sum_se[v] += se1;
        const double tstat = (rec.tau_hat[0] - tau1) / se1;
        const bool covered = std::fabs(tstat) <= t_crit(df1);
        if (covered) n_cover[v] += 1;
        if (!covered) n_reject_t[v] += 1;
        const double d = (rec.tau_hat[0] - rec.tau_hat[1]) - gap;
        const double w = d * d / (se1 * se1 + se2 * se2);
        if (1.0 - stats::f_cdf(w, 1.0, df1 + df2) < config.alpha)
          n_reject_f[v] += 1;
        if (1.0 - stats::chi_squared_cdf(w, 1.0) < config.alpha)
          n_reject_c[v] += 1;
      }
    }
    const auto reps = static_cast<double>(config.n_reps);
    bias_d.push_back(sum_tau / reps - tau1);
    const double center = sum_tau / reps;
    // SD around the per-draw mean; the tau1 offset cancels.
    const double var_tau =
        (sumsq_tau - reps * (center - tau1) * (center - tau1)) /
        (reps - 1.0);
    truese_d.push_back(std::sqrt(std::max(var_tau, 0.0)));
    for (size_t v = 0; v < n_var; ++v) {
      meanse_d[v].push_back(sum_se[v] / reps);
      cover_d[v].push_back(static_cast<double>(n_cover[v]) / reps);
      t1t_d[v].push_back(static_cast<double>(n_reject_t[v]) / reps);
      t1f_d[v].push_back(static_cast<double>(n_reject_f[v]) / reps);
      t1c_d[v].push_back(static_cast<double>(n_reject_c[v]) / reps);
    }
    report.rejects_by_draw.push_back(draw_rejects);
    report.total_rejects += draw_rejects;
  }

  auto mean = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
  };
  for (size_t v = 0; v < n_var; ++v) {
    report.rows[v].bias = mean(bias_d);
    report.rows[v].true_se = mean(truese_d);
    report.rows[v].mean_est_se = mean(meanse_d[v]);
    report.rows[v].coverage = mean(cover_d[v]);
    report.rows[v].type1_t = mean(t1t_d[v]);
    report.rows[v].type1_f = mean(t1f_d[v]);
    report.rows[v].type1_chisq = mean(t1c_d[v]);
  }
  return report;
}

}  // namespace subrct

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "subrct/design_math.hpp"
#include "subrct/errors.hpp"
#include "subrct/variance.hpp"

using namespace subrct;

namespace {

ModelSpec spec_of(CovariateForm f, bool blocked = false) {
  ModelSpec s;
  s.covariates = f;
  s.blocked = blocked;
  return s;
}

bool has_note(const VarResult& v, const std::string& note) {
  return std::find(v.notes.begin(), v.notes.end(), note) != v.notes.end();
}

}  // namespace

TEST_CASE("design-based variance on the unadjusted fit") {
  const TrialFrame f = fixtures::simple_frame();
  const FittedModel m = fit_model(f, spec_of(CovariateForm::None));
  VarianceOptions o;

  SUBCASE("actual and expected sizes coincide on balanced arms") {
    const VarResult a0 = var_design_based(m, 0, o);
    CHECK(a0.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a0.df == doctest::Approx(4.0));
    o.basis = SizeBasis::Expected;
    const VarResult e0 = var_design_based(m, 0, o);
    CHECK(e0.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    const VarResult a1 = var_design_based(m, 1, VarianceOptions{});
    CHECK(a1.variance == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("arm-share subtraction shrinks the denominators' charge") {
    o.phi_adjust = true;
    CHECK(var_design_based(m, 0, o).variance ==
          doctest::Approx(0.5333333333333333).epsilon(1e-12));
    CHECK(var_design_based(m, 1, o).variance ==
          doctest::Approx(2.1333333333333333).epsilon(1e-12));
  }

  SUBCASE("heterogeneity bound subtracts the arm-spread gap") {
    o.heterogeneity_bound = true;
    // subgroup a has equal arm spreads: the bound subtracts nothing
    CHECK(var_design_based(m, 0, o).variance ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(var_design_based(m, 1, o).variance ==
          doctest::Approx(2.2152504370215302).epsilon(1e-12));
  }

  SUBCASE("bell-mccaffrey df equals 2(m-1) here") {
    o.df_rule = DfRule::BellMcCaffrey;
    const VarResult v = var_design_based(m, 0, o);
    CHECK(v.df == doctest::Approx(4.0).epsilon(1e-12));
  }

  SUBCASE("normal rule reports infinite df") {
    o.df_rule = DfRule::Normal;
    CHECK(std::isinf(var_design_based(m, 0, o).df));
  }
}

TEST_CASE("design-based variance on the pooled-covariate fit") {
  const TrialFrame f = fixtures::simple_frame();
  const FittedModel m = fit_model(f, spec_of(CovariateForm::Pooled));
  VarianceOptions o;
  const VarResult a = var_design_based(m, 0, o);
  CHECK(a.variance == doctest::Approx(0.944761904761904).epsilon(1e-10));
  CHECK(a.df == doctest::Approx(3.5).epsilon(1e-12));
  const VarResult b = var_design_based(m, 1, o);
  CHECK(b.variance == doctest::Approx(2.40761904761905).epsilon(1e-10));

  SUBCASE("collinearity compensation divides by the effect-column fit") {
    o.r2_adjust = true;
    const VarResult r = var_design_based(m, 0, o);
    CHECK(r.variance == doctest::Approx(0.968380952380952).epsilon(1e-10));
  }
}

TEST_CASE("design-based variance on the interacted fit charges both slopes") {
  const TrialFrame f = fixtures::simple_frame();
  const FittedModel m =
      fit_model(f, spec_of(CovariateForm::InteractedBySubgroupAndArm));
  const VarResult a = var_design_based(m, 0, VarianceOptions{});
  CHECK(a.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(a.df == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(has_note(a, "df_interacted_full_charge"));
  const VarResult b = var_design_based(m, 1, VarianceOptions{});
  CHECK(b.variance == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sandwich variance matches the frozen oracles") {
  const TrialFrame f = fixtures::simple_frame();
  const FittedModel m0 = fit_model(f, spec_of(CovariateForm::None));
  const VarResult h0a = var_huber_white(m0, 0);
  CHECK(h0a.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(h0a.df == doctest::Approx(8.0));
  CHECK(var_huber_white(m0, 1).variance ==
        doctest::Approx(8.0 / 3.0).epsilon(1e-10));

  const FittedModel m1 = fit_model(f, spec_of(CovariateForm::Pooled));
  CHECK(var_huber_white(m1, 0).variance ==
        doctest::Approx(0.939123809523809).epsilon(1e-10));
  CHECK(var_huber_white(m1, 1).variance ==
        doctest::Approx(1.84944761904763).epsilon(1e-10));
  CHECK(var_huber_white(m1, 0).df == doctest::Approx(7.0));
}

TEST_CASE("finite-sample variance dominates the expected-size form") {
  const TrialFrame f = fixtures::simple_frame();
  const FittedModel m = fit_model(f, spec_of(CovariateForm::None));
  VarianceOptions o;
  const VarResult fa = var_finite_sample(m, 0, o);
  CHECK(fa.variance == doctest::Approx(0.748987707881417).epsilon(1e-10));
  const VarResult fb = var_finite_sample(m, 1, o);
  CHECK(fb.variance == doctest::Approx(2.99595083152567).epsilon(1e-10));
  o.basis = SizeBasis::Expected;
  CHECK(fa.variance >= var_design_based(m, 0, o).variance);
  CHECK(fb.variance >= var_design_based(m, 1, o).variance);

  // precomputed expected inverses give the identical number
  const AllocationLaw law{12, 6, 6};
  const double e1 = design_math::expected_inverse_arm_size(law, 1);
  const double e0 = design_math::expected_inverse_arm_size(law, 0);
  VarianceOptions oa;
  const VarResult fp = var_finite_sample(m, 0, oa, e1, e0);
  CHECK(fp.variance == fa.variance);
}

TEST_CASE("blocked variance pools cell variances by squared size") {
  const TrialFrame f = fixtures::blocked_frame();
  const FittedModel m = fit_model(f, spec_of(CovariateForm::None, true));
  VarianceOptions o;
  for (int k : {0, 1}) {
    const BlockedVarianceResult r = var_blocked(m, k, o);
    REQUIRE(r.per_block.size() == 2);
    CHECK(r.per_block[0].variance == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.per_block[1].variance ==
          doctest::Approx(1.4166666666666667).epsilon(1e-10));
    CHECK(r.pooled.variance == doctest::Approx(0.83).epsilon(1e-10));
    CHECK(r.pooled.df == doctest::Approx(6.0).epsilon(1e-12));
  }
  SUBCASE("bell-mccaffrey is not defined for pooled blocks") {
    o.df_rule = DfRule::BellMcCaffrey;
    const BlockedVarianceResult r = var_blocked(m, 0, o);
    CHECK(has_note(r.pooled, "bm_df_unavailable_blocked"));
  }
}

TEST_CASE("blocked variance with covariates matches the frozen oracle") {
  const TrialFrame f = fixtures::blocked_frame();
  const FittedModel m = fit_model(f, spec_of(CovariateForm::Pooled, true));
  VarianceOptions o;
  const BlockedVarianceResult a = var_blocked(m, 0, o);
  CHECK(a.pooled.variance == doctest::Approx(0.525590489404225).epsilon(1e-9));
  CHECK(a.pooled.df == doctest::Approx(5.5).epsilon(1e-12));
  const BlockedVarianceResult b = var_blocked(m, 1, o);
  CHECK(b.pooled.variance == doctest::Approx(1.18602233123565).epsilon(1e-9));
}

TEST_CASE("cluster design-based variance under both weightings") {
  VarianceOptions o;
  SUBCASE("subgroup-size weighting") {
    const ClusteredResult r = clustered_individual(
        fixtures::clustered_frame(ClusterWeighting::SubgroupSize),
        spec_of(CovariateForm::None));
    const VarResult a = var_cluster_design_based(r, 0, o);
    CHECK(a.variance == doctest::Approx(0.563515201999167).epsilon(1e-10));
    CHECK(a.df == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(has_note(a, "df_cluster_analog"));
    CHECK(var_cluster_design_based(r, 1, o).variance ==
          doctest::Approx(0.72969596001666).epsilon(1e-10));
    // balanced cluster counts: expected basis coincides
    VarianceOptions oe;
    oe.basis = SizeBasis::Expected;
    CHECK(var_cluster_design_based(r, 0, oe).variance ==
          doctest::Approx(0.563515201999167).epsilon(1e-10));
  }
  SUBCASE("equal-cluster weighting") {
    const ClusteredResult r = clustered_individual(
        fixtures::clustered_frame(ClusterWeighting::EqualCluster),
        spec_of(CovariateForm::None));
    CHECK(var_cluster_design_based(r, 0, o).variance ==
          doctest::Approx(0.472222222222222).epsilon(1e-10));
    CHECK(var_cluster_design_based(r, 1, o).variance ==
          doctest::Approx(0.666666666666667).epsilon(1e-10));
  }
}

TEST_CASE("cluster-robust sandwich matches the frozen oracle") {
  const ClusteredResult r = clustered_individual(
      fixtures::clustered_frame(ClusterWeighting::SubgroupSize),
      spec_of(CovariateForm::None));
  const VarResult a = var_crse(r, 0);
  CHECK(a.variance == doctest::Approx(0.50716368179925).epsilon(1e-10));
  CHECK(a.df == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(has_note(a, "df_cluster_count_analog"));
  CHECK(var_crse(r, 1).variance ==
        doctest::Approx(0.656726364014994).epsilon(1e-10));
}

TEST_CASE("cluster-level subgroup variance treats arm counts as random") {
  const ClusteredResult r = clustered_cluster_level(
      fixtures::cluster_subgroup_frame(), spec_of(CovariateForm::None));
  VarianceOptions o;
  o.basis = SizeBasis::Expected;
  const VarResult ae = var_cluster_level_subgroup(r, 0, o);
  CHECK(ae.variance == doctest::Approx(0.949450549450549).epsilon(1e-10));
  CHECK(ae.df == doctest::Approx(2.0).epsilon(1e-12));
  const VarResult be = var_cluster_level_subgroup(r, 1, o);
  CHECK(be.variance == doctest::Approx(0.37978021978022).epsilon(1e-10));

  VarianceOptions oa;  // Actual
  const VarResult aa = var_cluster_level_subgroup(r, 0, oa);
  CHECK(aa.variance == doctest::Approx(1.10769230769231).epsilon(1e-10));
  CHECK(has_note(aa, "actual_cluster_counts_no_phi"));
  CHECK(var_cluster_level_subgroup(r, 1, oa).variance ==
        doctest::Approx(0.443076923076923).epsilon(1e-10));
}

TEST_CASE("nonresponse variance matches the frozen oracle") {
  const NonresponseResult r = nonresponse_weighted(fixtures::nonresponse_frame(),
                                                   spec_of(CovariateForm::None));
  VarianceOptions o;
  o.basis = SizeBasis::Expected;
  const VarResult ae = var_nonresponse(r, 0, o);
  CHECK(ae.variance == doctest::Approx(0.576814058956916).epsilon(1e-10));
  CHECK(ae.df == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(has_note(ae, "df_respondent_analog"));
  const VarResult be = var_nonresponse(r, 1, o);
  CHECK(be.variance == doctest::Approx(3.22603550295858).epsilon(1e-10));

  VarianceOptions oa;
  const VarResult aa = var_nonresponse(r, 0, oa);
  CHECK(aa.variance == doctest::Approx(0.556264172335601).epsilon(1e-10));
  CHECK(has_note(aa, "actual_respondent_counts"));
  CHECK(var_nonresponse(r, 1, oa).variance ==
        doctest::Approx(2.9723865877712).epsilon(1e-10));
}

TEST_CASE("full response with unit weights collapses to the simple variance") {
  CsvSchema s;
  s.id = "id";
  s.y = "y";
  s.t = "t";
  s.subgroup = "grp";
  s.responded = "resp";
  s.weight = "wt";
  std::string csv = "id,y,t,grp,resp,wt\n";
  const char* rows[] = {"1,5,1,a",  "2,7,1,a", "3,6,1,a", "4,1,0,a",
                        "5,2,0,a",  "6,3,0,a", "7,10,1,b", "8,8,1,b",
                        "9,9,1,b",  "10,4,0,b", "11,5,0,b", "12,9,0,b"};
  for (const char* r : rows) csv += std::string(r) + ",1,1\n";
  subrct::DesignSpec d;
  d.p = 0.5;
  const TrialFrame fr = to_frame(read_csv_string(csv, s, d));
  const NonresponseResult nr = nonresponse_weighted(fr, spec_of(CovariateForm::None));

  const TrialFrame fs = fixtures::simple_frame();
  const FittedModel ms = fit_model(fs, spec_of(CovariateForm::None));
  for (int k : {0, 1}) {
    const SubgroupEstimate dm = diff_in_means(fs, k);
    CHECK(nr.estimates[static_cast<size_t>(k)].tau_hat == dm.tau_hat);
    VarianceOptions o;
    const VarResult base = var_design_based(ms, k, o);
    const VarResult w = var_nonresponse(nr, k, o);
    CHECK(w.variance == doctest::Approx(base.variance).epsilon(1e-14));
  }
}

TEST_CASE("heterogeneity bound never goes negative") {
  // By Cauchy-Schwarz s1^2/n1 + s0^2/n0 >= (s1 - s0)^2 / n_k, so the bound
  // can only shrink the variance, not cross zero; stress it with a lopsided
  // spread anyway and check the clamp stays quiet.
  CsvSchema s;
  s.y = "y";
  s.t = "t";
  s.subgroup = "grp";
  subrct::DesignSpec d;
  d.p = 0.5;
  const TrialFrame f = to_frame(read_csv_string(
      "grp,t,y\n"
      "a,1,100\na,1,0\na,0,5\na,0,5\n",
      s, d));
  const FittedModel m = fit_model(f, spec_of(CovariateForm::None));
  VarianceOptions o;
  o.heterogeneity_bound = true;
  const VarResult v = var_design_based(m, 0, o);
  CHECK(v.variance >= 0.0);
  CHECK_FALSE(v.clamped);
  // s1^2 = 5000, s0^2 = 0: base 2500 minus 5000 / 4
  CHECK(v.variance == doctest::Approx(1250.0).epsilon(1e-12));

  o.basis = SizeBasis::Expected;
  const VarResult ve = var_design_based(m, 0, o);
  CHECK(ve.variance >= 0.0);
  CHECK_FALSE(ve.clamped);
}

TEST_CASE("welch-style df closed forms") {
  CHECK(bell_mccaffrey_df(7, 5, 2, 0.5, 1.0, 1.0) ==
        doctest::Approx(6.75).epsilon(1e-12));
  CHECK(bell_mccaffrey_df(9, 14, 0, 0.4, 0.6, 0.7) ==
        doctest::Approx(17.2140175219024).epsilon(1e-12));
  // balanced, covariate free: 2(m - 1)
  CHECK(bell_mccaffrey_df(5, 5, 0, 0.5, 1.0, 1.0) ==
        doctest::Approx(8.0).epsilon(1e-14));
  for (int m = 2; m <= 12; ++m)
    CHECK(bell_mccaffrey_df(m, m, 0, 0.5, 1.0, 1.0) ==
          doctest::Approx(2.0 * (m - 1)).epsilon(1e-13));
}

TEST_CASE("r2 adjustment needs covariates to act on") {
  const TrialFrame f = fixtures::simple_frame();
  const FittedModel m = fit_model(f, spec_of(CovariateForm::None));
  VarianceOptions o;
  o.r2_adjust = true;
  CHECK_THROWS_AS(var_design_based(m, 0, o), ConfigError);
}

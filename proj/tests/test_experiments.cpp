#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "stochrot/experiments.hpp"

using namespace stochrot;

namespace {

const double kC0 = std::sqrt(298.0 / 300.0);

EllipsoidParams reference_params() {
  return EllipsoidParams::from_axes(1.0, kC0, 1.0, -(1.0 - kC0), 1.0 - kC0);
}

ToyModelParams toy(double alpha, double beta) {
  ToyModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = 10.0;
  p.c0 = kC0;
  p.d_max = 1.0 - kC0;
  p.d_min = -p.d_max;
  return p;
}

IntegratorConfig one_day(std::uint64_t seed = 1) {
  IntegratorConfig c;
  c.h = 1e-4;
  c.t_end = kDay;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("names round-trip") {
  for (Observable o : all_observables()) CHECK(parse_observable(to_string(o)) == o);
  for (auto s : {Scenario::deterministic_1day, Scenario::deterministic_7day,
                 Scenario::stochastic_1day, Scenario::stochastic_7day, Scenario::custom})
    CHECK(parse_scenario(to_string(s)) == s);
  CHECK_FALSE(parse_observable("Omega4"));
}

TEST_CASE("single deterministic path: summary equals the trajectory") {
  const EllipsoidParams p = reference_params();
  const DeformationLaw law = make_toy_law(toy(1e-3, 0.0));
  EnsembleConfig ec;
  ec.observables = all_observables();
  ec.keep_paths = true;
  const EnsembleSummary s = run_ensemble(ec, law, p, one_day(), {5e-7, 0, 1});
  const Trajectory t = invariance_preserving_run(law, p, one_day(), {5e-7, 0, 1});
  REQUIRE(s.times.size() == t.samples.size());
  const double j2_0 = s.validation.j2_initial;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const SampleRow row = derive_row(t.samples[i], p, j2_0);
    for (std::size_t k = 0; k < s.observables.size(); ++k) {
      CHECK(s.stats[k].mean[i] == observable_value(s.observables[k], row));
      CHECK(s.stats[k].variance[i] == 0.0);
      CHECK(s.stats[k].std_error[i] == 0.0);
    }
  }
  CHECK(s.validation.ito_mean == 0.0);
  CHECK(s.drift.ito_term.mean.back() == 0.0);
  CHECK(s.drift.martingale.mean.back() == 0.0);
}

TEST_CASE("deterministic drift validation: no Ito term, routes agree") {
  const EllipsoidParams p = reference_params();
  const DeformationLaw law = make_toy_law(toy(1e-3, 0.0));
  EnsembleConfig ec;
  ec.n_paths = 2;
  const EnsembleSummary s = run_ensemble(ec, law, p, one_day(), {5e-7, 0, 1});
  CHECK(s.validation.ito_mean == 0.0);
  CHECK(s.validation.martingale_mean == 0.0);
  CHECK(s.validation.max_pairwise_rms() < 1e-12);
  CHECK(s.validation.max_identity_gap < 1e-12);
  CHECK_FALSE(s.validation.ito_resolved());
}

TEST_CASE("standard error is sqrt(variance / n)") {
  const EllipsoidParams p = reference_params();
  EnsembleConfig ec;
  ec.n_paths = 40;
  IntegratorConfig cfg = one_day();
  cfg.t_end = 0.5;
  const EnsembleSummary s = run_ensemble(ec, make_toy_law(toy(1e-3, 5.0)), p, cfg, {5e-7, 0, 1});
  for (const SeriesStats& st : s.stats)
    for (std::size_t i = 0; i < st.mean.size(); ++i)
      CHECK(st.std_error[i] == doctest::Approx(std::sqrt(st.variance[i] / 40.0)).epsilon(1e-15));
}

TEST_CASE("same seed gives identical summaries; other seeds differ") {
  const EllipsoidParams p = reference_params();
  const DeformationLaw law = make_toy_law(toy(1e-3, 1e-4));
  EnsembleConfig ec;
  ec.n_paths = 5;
  IntegratorConfig cfg = one_day(8);
  cfg.t_end = 1.0;
  const EnsembleSummary a = run_ensemble(ec, law, p, cfg, {5e-7, 0, 1});
  const EnsembleSummary b = run_ensemble(ec, law, p, cfg, {5e-7, 0, 1});
  cfg.seed = 9;
  const EnsembleSummary c = run_ensemble(ec, law, p, cfg, {5e-7, 0, 1});
  CHECK(a.stats[0].mean == b.stats[0].mean);
  CHECK(a.stats[0].variance == b.stats[0].variance);
  CHECK(a.stats[0].mean != c.stats[0].mean);
}

TEST_CASE("drift validation from kept paths matches the streamed report") {
  const EllipsoidParams p = reference_params();
  EnsembleConfig ec;
  ec.n_paths = 3;
  ec.keep_paths = true;
  IntegratorConfig cfg = one_day();
  cfg.t_end = 1.0;
  const EnsembleSummary s = run_ensemble(ec, make_toy_law(toy(1e-3, 10.0)), p, cfg, {5e-7, 0, 1});
  const DriftValidationReport r = drift_validation(s.paths, p);
  CHECK(r.paths == 3);
  CHECK(r.samples == s.validation.samples);
  CHECK(r.rms_integrated_vs_state == doctest::Approx(s.validation.rms_integrated_vs_state).epsilon(1e-12));
  CHECK(r.martingale_mean == doctest::Approx(s.validation.martingale_mean).epsilon(1e-12));
  CHECK(r.summary().find("martingale") != std::string::npos);
}

TEST_CASE("J2 and H increments satisfy the pathwise identity") {
  const EllipsoidParams p = reference_params();
  EnsembleConfig ec;
  ec.n_paths = 8;
  const EnsembleSummary s =
      run_ensemble(ec, make_toy_law(toy(1e-3, 1e-4)), p, one_day(), {5e-7, 0, 1});
  CHECK(s.validation.max_identity_gap < 1e-10);
}

TEST_CASE("mean J2 change agrees with the drift integral within 3 standard errors") {
  const EllipsoidParams p = reference_params();
  EnsembleConfig ec;
  ec.n_paths = 1000;
  const EnsembleSummary s =
      run_ensemble(ec, make_toy_law(toy(1e-3, 1e-4)), p, one_day(2718), {5e-7, 0, 1});
  const std::vector<double> z = s.drift.residual_in_se();
  CHECK(std::abs(z.back()) < 3.0);
  CHECK(s.validation.martingale_within_3se());
  CHECK(s.drift.ito_term.mean.back() > 0.0);
  CHECK(s.events.out_of_bounds == 0);
}

TEST_CASE("integration aborts propagate with the path index") {
  const EllipsoidParams p = reference_params();
  LawSpec spec;
  spec.drift = DriftForm::constant;
  spec.drift_coef = 1.0;
  spec.diffusion = DiffusionForm::zero;
  EnsembleConfig ec;
  ec.n_paths = 3;
  IntegratorConfig cfg = one_day(55);
  try {
    run_ensemble(ec, make_law(toy(0.0, 0.0), spec), p, cfg, {5e-7, 0, 1});
    FAIL("expected IntegrationAborted");
  } catch (const IntegrationAborted& e) {
    CHECK(e.path_index == 0);
    CHECK(e.seed == 55);
  }
}

TEST_CASE("ensemble configuration validation") {
  EnsembleConfig ec;
  ec.n_paths = 0;
  CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
  ec.n_paths = 1;
  ec.brownian_refine = 0;
  CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
}

TEST_CASE("polar motion amplitude") {
  const EllipsoidParams p = reference_params();
  const Trajectory t =
      invariance_preserving_run(make_toy_law(toy(1e-3, 0.0)), p, one_day(), {5e-7, 0, 1});
  CHECK(polar_motion_amplitude(t, p) == doctest::Approx(5e-7).epsilon(1e-3));
}

TEST_CASE("log-log slope") {
  const std::vector<double> h{1e-1, 1e-2, 1e-3};
  const std::vector<double> e{2e-1, 2e-2, 2e-3};
  CHECK(loglog_slope(h, e) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> s{std::sqrt(1e-1), std::sqrt(1e-2), std::sqrt(1e-3)};
  CHECK(loglog_slope(h, s) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}));
}

TEST_CASE("convergence study rejects bad level sets") {
  const EllipsoidParams p = reference_params();
  const DeformationLaw law = make_toy_law(toy(1e-3, 1e-4));
  IntegratorConfig cfg = one_day();
  cfg.t_end = 0.1;
  const std::vector<double> two{1e-3, 1e-4};
  CHECK_THROWS_AS(convergence_study(law, p, cfg, {5e-7, 0, 1}, two, 4), std::invalid_argument);
  const std::vector<double> ragged{1e-3, 3e-4, 1e-4};
  CHECK_THROWS_AS(convergence_study(law, p, cfg, {5e-7, 0, 1}, ragged, 4), std::invalid_argument);
  const std::vector<double> ascending{1e-4, 1e-3, 1e-2};
  CHECK_THROWS_AS(convergence_study(law, p, cfg, {5e-7, 0, 1}, ascending, 4),
                  std::invalid_argument);
}

TEST_CASE("Euler-Maruyama on geometric Brownian motion has strong order 1/2") {
  const std::vector<double> h{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const ConvergenceResult r = gbm_convergence(0.0, 0.5, 1.0, 1.0, h, 400, 17);
  REQUIRE(r.levels.size() == 4);
  CHECK(r.slope > 0.4);
  CHECK(r.slope < 0.6);
  CHECK(r.slope_ci_low <= r.slope);
  CHECK(r.slope_ci_high >= r.slope);
  for (std::size_t i = 1; i < r.levels.size(); ++i)
    CHECK(r.levels[i].strong_error < r.levels[i - 1].strong_error);
}

TEST_CASE("Euler on the deterministic toy model has order 1") {
  const EllipsoidParams p = reference_params();
  const DeformationLaw law = make_toy_law(toy(10.0, 0.0));
  IntegratorConfig cfg = one_day();
  cfg.t_end = 1.0;
  const std::vector<double> h{1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-5};
  const ConvergenceResult r = convergence_study(law, p, cfg, {5e-7, 0, 1}, h, 2);
  CHECK(r.slope > 0.9);
  CHECK(r.slope < 1.1);
  CHECK(r.reference_h == 1e-5);
}

TEST_CASE("drift consistency levels share paths and shrink like sqrt(h)") {
  const EllipsoidParams p = reference_params();
  const DeformationLaw law = make_toy_law(toy(1e-3, 10.0));
  IntegratorConfig base;
  base.h = 1e-3;
  base.t_end = 1.0;
  base.seed = 8;
  EnsembleConfig ec;
  ec.n_paths = 64;
  const DriftConsistencyResult r = drift_consistency_study(ec, law, p, base, {5e-7, 0, 1}, 2);
  REQUIRE(r.levels.size() == 3);
  CHECK(r.levels[1].h == 5e-4);
  CHECK(r.levels[2].h == 2.5e-4);
  for (const auto& l : r.levels) {
    CHECK(l.report.paths == 64);
    CHECK(l.report.rms_integrated_vs_integral < 1e-3 * l.report.rms_integrated_vs_state);
  }
  // Same sample times at every level.
  CHECK(r.levels[0].report.samples == r.levels[2].report.samples);
  CHECK(r.slope_integrated_vs_state > 0.3);
  CHECK(r.slope_integrated_vs_state < 0.7);
  CHECK_THROWS_AS(drift_consistency_study(ec, law, p, base, {5e-7, 0, 1}, 0),
                  std::invalid_argument);
}

#include <bit>
#include <cmath>
#include <cstring>
#include <algorithm>
#include <random>

#include "doctest.h"
#include "stochrot/experiments.hpp"
#include "stochrot/simd/dispatch.hpp"

using namespace stochrot;
using namespace stochrot::simd;

namespace {

const double kC0 = std::sqrt(298.0 / 300.0);

EllipsoidParams reference_params() {
  return EllipsoidParams::from_axes(1.0, kC0, 1.0, -(1.0 - kC0), 1.0 - kC0);
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_state(const PathState& a, const PathState& b) {
  return std::memcmp(&a, &b, sizeof(PathState)) == 0;
}

// Random lanes, some pushed against the bounds so that rejections occur.
LaneBuffer random_lanes(std::size_t n, const EllipsoidParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LaneBuffer buf(n);
  const PathState init = initial_path_state(p, {5e-7, 0, 1});
  for (std::size_t l = 0; l < n; ++l) {
    PathState s = init;
    const double r = u(rng);
    if (l % 5 == 0)
      s.c = p.lower() + 1e-9 * r;
    else if (l % 5 == 1)
      s.c = p.upper() - 1e-9 * r;
    else
      s.c = p.lower() + (p.upper() - p.lower()) * r;
    s.omega[0] = 5e-7 * (u(rng) - 0.5);
    s.omega[1] = 5e-7 * (u(rng) - 0.5);
    s.acc_ito = 1e-12 * u(rng);
    buf.set(l, s);
  }
  return buf;
}

}  // namespace

TEST_CASE("backend registry") {
  CHECK(backend_available(Backend::scalar));
  CHECK(lane_width(Backend::scalar) == 1);
  CHECK(backend_available(best_backend()));
  for (Backend b : available_backends()) {
    CHECK(parse_backend(to_string(b)) == b);
    CHECK(toy_step_kernel(b) != nullptr);
  }
  CHECK_FALSE(parse_backend("auto"));
  if (!backend_available(Backend::neon)) CHECK_THROWS(toy_step_kernel(Backend::neon));
}

// The kernel must reproduce em_advance<double> plus the safety test lane by
// lane, bit for bit, on every backend.
TEST_CASE("kernels match the scalar formulas bitwise") {
  const EllipsoidParams p = reference_params();
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Backend b : available_backends()) {
    CAPTURE(to_string(b));
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 64;
      LaneBuffer buf = random_lanes(n, p, rng);
      const LaneBuffer before = buf;
      ToyStepInputs in;
      in.alpha_cos = 1e-3 * std::cos(10.0 * trial * 1e-4) * (trial % 3 == 0 ? 1e4 : 1.0);
      in.beta = trial % 2 ? 1e-4 : 5000.0;
      in.lower = p.lower();
      in.upper = p.upper();
      in.h = 1e-4;
      in.max_increment = 6.0 * std::sqrt(in.h);
      in.consts = PhysConsts::from(p);
      std::vector<double> db(n);
      for (double& x : db) x = std::clamp(std::sqrt(in.h) * normal(rng), -in.max_increment, in.max_increment);
      std::vector<std::uint8_t> rejected(n, 7);
      const std::size_t count = toy_step_kernel(b)(buf.view(), db.data(), in, rejected.data());

      std::size_t expected_rejections = 0;
      for (std::size_t l = 0; l < n; ++l) {
        const PathState s = before.get(l);
        const double f = formulas::boundary_poly(in.alpha_cos, s.c, in.lower, in.upper);
        const double g = formulas::boundary_poly(in.beta, s.c, in.lower, in.upper);
        const double bound = formulas::worst_case_move(f, g, in.h, in.max_increment);
        const PathState next = formulas::em_advance(s, f, g, in.h, db[l], in.consts);
        const bool ok = formulas::step_is_safe(s.c, bound, in.lower, in.upper) &&
                        formulas::inside(next.c, in.lower, in.upper);
        expected_rejections += ok ? 0 : 1;
        CHECK(rejected[l] == (ok ? 0 : 1));
        CHECK(same_state(buf.get(l), ok ? next : s));
      }
      CHECK(count == expected_rejections);
    }
  }
}

TEST_CASE("kernel rejections do occur in the equivalence test") {
  const EllipsoidParams p = reference_params();
  std::mt19937_64 rng(5);
  LaneBuffer buf = random_lanes(40, p, rng);
  ToyStepInputs in;
  in.beta = 5000.0;
  in.lower = p.lower();
  in.upper = p.upper();
  in.h = 1e-4;
  in.max_increment = 6.0 * std::sqrt(in.h);
  in.consts = PhysConsts::from(p);
  std::vector<double> db(40, 0.0);
  std::vector<std::uint8_t> rejected(40);
  CHECK(toy_step_scalar(buf.view(), db.data(), in, rejected.data()) > 0);
}

namespace {

EnsembleSummary run_with(std::optional<Backend> backend, bool strip_toy, unsigned threads,
                         double beta, std::size_t n_paths) {
  const EllipsoidParams p = reference_params();
  ToyModelParams toy;
  toy.alpha = 50.0;
  toy.beta = beta;
  toy.gamma = 10.0;
  toy.c0 = kC0;
  toy.d_max = 1.0 - kC0;
  toy.d_min = -toy.d_max;
  DeformationLaw law = make_toy_law(toy);
  if (strip_toy) law.toy.reset();
  IntegratorConfig cfg;
  cfg.t_end = 0.5;
  cfg.seed = 31337;
  cfg.decimate = 7;
  EnsembleConfig ec;
  ec.n_paths = n_paths;
  ec.observables = all_observables();
  ec.backend = backend;
  ec.threads = threads;
  ec.keep_paths = true;
  return run_ensemble(ec, law, p, cfg, {5e-7, 0, 1});
}

void check_identical(const EnsembleSummary& a, const EnsembleSummary& b) {
  REQUIRE(a.times.size() == b.times.size());
  REQUIRE(a.stats.size() == b.stats.size());
  for (std::size_t k = 0; k < a.stats.size(); ++k)
    for (std::size_t t = 0; t < a.times.size(); ++t) {
      CHECK(same_bits(a.stats[k].mean[t], b.stats[k].mean[t]));
      CHECK(same_bits(a.stats[k].variance[t], b.stats[k].variance[t]));
    }
  for (std::size_t t = 0; t < a.times.size(); ++t) {
    CHECK(same_bits(a.drift.residual.mean[t], b.drift.residual.mean[t]));
    CHECK(same_bits(a.drift.martingale.variance[t], b.drift.martingale.variance[t]));
  }
  CHECK(same_bits(a.validation.rms_integrated_vs_state, b.validation.rms_integrated_vs_state));
  CHECK(same_bits(a.validation.martingale_mean, b.validation.martingale_mean));
  CHECK(same_bits(a.validation.ito_se, b.validation.ito_se));
  CHECK(a.events.steps == b.events.steps);
  CHECK(a.events.shrunk_steps == b.events.shrunk_steps);
  CHECK(a.events.substeps == b.events.substeps);
  REQUIRE(a.paths.size() == b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    REQUIRE(a.paths[i].samples.size() == b.paths[i].samples.size());
    for (std::size_t j = 0; j < a.paths[i].samples.size(); ++j)
      CHECK(std::memcmp(&a.paths[i].samples[j], &b.paths[i].samples[j], sizeof(Sample)) == 0);
  }
}

}  // namespace

TEST_CASE("batched ensembles equal the per-path reference bitwise") {
  for (double beta : {0.0, 1e-4, 5000.0}) {
    CAPTURE(beta);
    const EnsembleSummary ref = run_with(std::nullopt, true, 1, beta, 37);
    CHECK(ref.backend == "reference");
    if (beta == 5000.0) CHECK(ref.events.shrunk_steps > 0);
    for (Backend b : available_backends()) {
      CAPTURE(to_string(b));
      const EnsembleSummary s = run_with(b, false, 1, beta, 37);
      CHECK(s.backend == to_string(b));
      check_identical(ref, s);
    }
  }
}

TEST_CASE("ensemble results do not depend on the thread count") {
  const EnsembleSummary one = run_with(std::nullopt, false, 1, 5000.0, 70);
  const EnsembleSummary three = run_with(std::nullopt, false, 3, 5000.0, 70);
  check_identical(one, three);
}

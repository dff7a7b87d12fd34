#pragma once

// Euler and Euler-Maruyama steppers and the invariance-preserving path
// runner for the deforming-ellipsoid system.

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stochrot/brownian.hpp"
#include "stochrot/core.hpp"
#include "stochrot/deformation.hpp"
#include "stochrot/dynamics.hpp"
#include "stochrot/formulas.hpp"

namespace stochrot {

enum class BoundaryPolicy { shrink_step, clamp_with_log };

const char* to_string(BoundaryPolicy p);

struct IntegratorConfig {
  double h = 1e-4;
  double t_end = kDay;
  std::uint64_t seed = 0;
  double truncation_k = 6.0;
  BoundaryPolicy boundary_policy = BoundaryPolicy::shrink_step;
  /// Output every `decimate` steps (plus the terminal step).
  std::uint64_t decimate = 10;
  /// Sub-steps shorter than h / 2^max_halvings abort the run.
  unsigned max_halvings = 20;

  void validate() const;
  /// Number of base steps: round(t_end / h).
  std::uint64_t steps() const;
};

/// x_{n+1} = x_n + f(t_n, x_n) h.
template <std::size_t N, class Rhs>
std::array<double, N> euler_step(const std::array<double, N>& x, double t, Rhs&& rhs,
                                 double h) {
  const std::array<double, N> f = rhs(t, x);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + f[i] * h;
  return out;
}

/// x_{n+1} = x_n + f h + g dB with one shared scalar increment.
/// `coeffs(t, x)` returns the pair (drift, diffusion).
template <std::size_t N, class Coeffs>
std::array<double, N> euler_maruyama_step(const std::array<double, N>& x, double t,
                                          Coeffs&& coeffs, double h, double db) {
  const auto [f, g] = coeffs(t, x);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + f[i] * h + g[i] * db;
  return out;
}

SystemVector to_vector(const SystemState& s);
SystemState from_vector(double t, const SystemVector& v);

/// One Euler step of the deterministic system (diffusion ignored).
SystemState euler_step(const SystemState& s, const DeformationLaw& law,
                       const EllipsoidParams& params, double h);

/// One Euler-Maruyama step of the stochastic system.
SystemState euler_maruyama_step(const SystemState& s, const DeformationLaw& law,
                                const EllipsoidParams& params, double h, double db);

using PathState = formulas::LaneState<double>;

/// Rotation vector, inertia and c at c0, with H and J2 accumulators set to
/// their initial values.
PathState initial_path_state(const EllipsoidParams& params,
                             const std::array<double, 3>& omega0);

struct Sample {
  double t = 0.0;
  PathState state{};
};

struct ClampRecord {
  double t = 0.0;
  double c_unclamped = 0.0;
};

struct RunEvents {
  std::uint64_t steps = 0;
  std::uint64_t shrunk_steps = 0;  // base steps that needed bisection
  std::uint64_t substeps = 0;
  std::uint64_t clamp_events = 0;
  std::uint64_t out_of_bounds = 0;  // committed states outside [lo, hi]
  std::vector<ClampRecord> clamp_log;  // first kClampLogLimit events

  static constexpr std::size_t kClampLogLimit = 64;
  void merge(const RunEvents& other);
};

struct Trajectory {
  std::vector<Sample> samples;
  RunEvents events;
  double lower = 0.0;
  double upper = 0.0;
};

class IntegrationAborted : public std::runtime_error {
 public:
  IntegrationAborted(const std::string& what, std::uint64_t path, std::uint64_t seed,
                     double t, double c)
      : std::runtime_error(what), path_index(path), seed(seed), t(t), c(c) {}
  std::uint64_t path_index;
  std::uint64_t seed;
  double t;
  double c;
};

/// Advances one path by whole base steps while keeping c inside the law's
/// bounds. A base step is taken as is when its worst-case move
/// |f| h + |g| max|dB| cannot reach a bound and the result lies in
/// [lo, hi]; otherwise it is bisected recursively with fresh sub-step
/// increments (shrink_step) or taken and projected back (clamp_with_log).
class PathStepper {
 public:
  PathStepper(const DeformationLaw& law, const EllipsoidParams& params,
              const IntegratorConfig& config, const BrownianPath& noise);

  /// Step n: t_n = n h to t_{n+1}.
  void advance(PathState& s, std::uint64_t n, RunEvents& events) const;

  double time(std::uint64_t n) const { return static_cast<double>(n) * h_; }
  const PhysConsts& consts() const { return consts_; }

 private:
  void bisect(PathState& s, std::uint64_t n, double t, double len, unsigned depth,
              std::uint32_t index, RunEvents& events) const;

  const DeformationLaw& law_;
  const IntegratorConfig& config_;
  const BrownianPath& noise_;
  PhysConsts consts_;
  double h_;
  double lo_;
  double hi_;
};

using SampleSink = std::function<void(const Sample&)>;

struct PathRunOptions {
  std::uint64_t path_index = 0;
  /// Brownian increments are sums of `refine` fine draws of step h / refine.
  std::uint32_t refine = 1;
  bool keep_samples = true;
  SampleSink sink;
};

/// Full trajectory over [0, t_end] sampled every `decimate` steps.
Trajectory invariance_preserving_run(const DeformationLaw& law, const EllipsoidParams& params,
                                     const IntegratorConfig& config,
                                     const std::array<double, 3>& omega0,
                                     const PathRunOptions& options = {});

}  // namespace stochrot

#include "stochrot/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stochrot {

const char* to_string(BoundaryPolicy p) {
  return p == BoundaryPolicy::shrink_step ? "shrink-step" : "clamp-with-log";
}

void IntegratorConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("t_end must be positive");
  if (!(truncation_k >= 3.0)) throw std::invalid_argument("truncation_k must be >= 3");
  if (decimate == 0) throw std::invalid_argument("decimate must be >= 1");
  if (max_halvings == 0 || max_halvings > 20)
    throw std::invalid_argument("max_halvings must be in [1, 20]");
  if (steps() == 0) throw std::invalid_argument("t_end shorter than one step");
}

std::uint64_t IntegratorConfig::steps() const {
  return static_cast<std::uint64_t>(std::llround(t_end / h));
}

SystemVector to_vector(const SystemState& s) {
  return {s.omega[0], s.omega[1], s.omega[2], s.inertia[0],
          s.inertia[1], s.inertia[2], s.c};
}

SystemState from_vector(double t, const SystemVector& v) {
  SystemState s;
  s.t = t;
  s.omega = {v[0], v[1], v[2]};
  s.inertia = {v[3], v[4], v[5]};
  s.c = v[6];
  return s;
}

SystemState euler_step(const SystemState& s, const DeformationLaw& law,
                       const EllipsoidParams& params, double h) {
  const auto rhs = [&](double t, const SystemVector& x) {
    return deterministic_system_increment(from_vector(t, x), law, params).drift;
  };
  return from_vector(s.t + h, stochrot::euler_step(to_vector(s), s.t, rhs, h));
}

SystemState euler_maruyama_step(const SystemState& s, const DeformationLaw& law,
                                const EllipsoidParams& params, double h, double db) {
  const auto coeffs = [&](double t, const SystemVector& x) {
    const SystemIncrement inc = stochastic_system_increment(from_vector(t, x), law, params);
    return std::pair{inc.drift, inc.diffusion};
  };
  return from_vector(s.t + h, stochrot::euler_maruyama_step(to_vector(s), s.t, coeffs, h, db));
}

PathState initial_path_state(const EllipsoidParams& params,
                             const std::array<double, 3>& omega0) {
  const EllipsoidState e = state_from_c(0.0, params.c0, omega0, params);
  const FlatteningObservables obs = observables(e, params);
  PathState s{};
  for (int i = 0; i < 3; ++i) s.omega[i] = omega0[i];
  s.inertia[0] = e.i1;
  s.inertia[1] = e.i2;
  s.inertia[2] = e.i3;
  s.c = e.c;
  s.h_int = obs.dynamical;
  s.j2_int = obs.j2;
  s.acc_c2dc = 0.0;
  s.acc_drift = 0.0;
  s.acc_ito = 0.0;
  s.acc_mart = 0.0;
  return s;
}

void RunEvents::merge(const RunEvents& o) {
  steps += o.steps;
  shrunk_steps += o.shrunk_steps;
  substeps += o.substeps;
  clamp_events += o.clamp_events;
  out_of_bounds += o.out_of_bounds;
  for (const auto& r : o.clamp_log) {
    if (clamp_log.size() >= kClampLogLimit) break;
    clamp_log.push_back(r);
  }
}

PathStepper::PathStepper(const DeformationLaw& law, const EllipsoidParams& params,
                         const IntegratorConfig& config, const BrownianPath& noise)
    : law_(law),
      config_(config),
      noise_(noise),
      consts_(PhysConsts::from(params)),
      h_(config.h),
      lo_(law.lower),
      hi_(law.upper) {}

void PathStepper::advance(PathState& s, std::uint64_t n, RunEvents& events) const {
  using namespace formulas;
  const double t = time(n);
  const double f = law_.drift(t, s.c);
  const double g = law_.diffusion(t, s.c);
  const double db = law_.deterministic ? 0.0 : noise_.increment(n);
  ++events.steps;

  if (config_.boundary_policy == BoundaryPolicy::clamp_with_log) {
    PathState next = em_advance(s, f, g, h_, db, consts_);
    if (!inside(next.c, lo_, hi_)) {
      ++events.clamp_events;
      if (events.clamp_log.size() < RunEvents::kClampLogLimit)
        events.clamp_log.push_back({t + h_, next.c});
      const double projected = std::clamp(next.c, lo_, hi_);
      next.acc_c2dc = s.acc_c2dc + consts_.kappa_j * (s.c * s.c) * (projected - s.c);
      next.c = projected;
    }
    s = next;
  } else {
    const double bound = worst_case_move(f, g, h_, noise_.max_abs_increment());
    bool committed = false;
    if (step_is_safe(s.c, bound, lo_, hi_)) {
      const PathState next = em_advance(s, f, g, h_, db, consts_);
      if (inside(next.c, lo_, hi_)) {
        s = next;
        committed = true;
      }
    }
    if (!committed) {
      ++events.shrunk_steps;
      const double half = 0.5 * h_;
      bisect(s, n, t, half, 1, 0, events);
      bisect(s, n, t + half, half, 1, 1, events);
    }
  }
  if (!inside(s.c, lo_, hi_)) ++events.out_of_bounds;
}

void PathStepper::bisect(PathState& s, std::uint64_t n, double t, double len, unsigned depth,
                         std::uint32_t index, RunEvents& events) const {
  using namespace formulas;
  if (depth > config_.max_halvings) {
    std::ostringstream os;
    os << "step underflow: sub-step below h/2^" << config_.max_halvings << " at t=" << t
       << ", c=" << s.c << " (path " << noise_.path_index() << ", seed " << noise_.seed()
       << "); the deformation law is not admissible in practice";
    throw IntegrationAborted(os.str(), noise_.path_index(), noise_.seed(), t, s.c);
  }
  const double f = law_.drift(t, s.c);
  const double g = law_.diffusion(t, s.c);
  const double db = law_.deterministic ? 0.0 : noise_.substep_increment(n, depth, index);
  const double bound = worst_case_move(f, g, len, noise_.max_abs_substep(depth));
  if (step_is_safe(s.c, bound, lo_, hi_)) {
    const PathState next = em_advance(s, f, g, len, db, consts_);
    if (inside(next.c, lo_, hi_)) {
      s = next;
      ++events.substeps;
      return;
    }
  }
  const double half = 0.5 * len;
  bisect(s, n, t, half, depth + 1, 2 * index, events);
  bisect(s, n, t + half, half, depth + 1, 2 * index + 1, events);
}

Trajectory invariance_preserving_run(const DeformationLaw& law, const EllipsoidParams& params,
                                     const IntegratorConfig& config,
                                     const std::array<double, 3>& omega0,
                                     const PathRunOptions& options) {
  config.validate();
  params.validate();
  if (!(law.lower < law.upper) || !(law.lower > 0.0))
    throw std::invalid_argument("deformation law bounds must satisfy 0 < lo < hi");

  const BrownianPath noise(config.seed, options.path_index, config.h / options.refine,
                           config.truncation_k, options.refine);
  const PathStepper stepper(law, params, config, noise);

  Trajectory traj;
  traj.lower = law.lower;
  traj.upper = law.upper;
  const std::uint64_t steps = config.steps();
  if (options.keep_samples) traj.samples.reserve(steps / config.decimate + 2);

  PathState s = initial_path_state(params, omega0);
  const auto emit = [&](double t) {
    const Sample sample{t, s};
    if (options.sink) options.sink(sample);
    if (options.keep_samples) traj.samples.push_back(sample);
  };
  emit(0.0);
  for (std::uint64_t n = 0; n < steps; ++n) {
    stepper.advance(s, n, traj.events);
    if ((n + 1) % config.decimate == 0 || n + 1 == steps) emit(stepper.time(n + 1));
  }
  return traj;
}

}  // namespace stochrot

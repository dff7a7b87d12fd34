#include "stochrot/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stochrot/simd/lanes.hpp"

namespace stochrot {

namespace {

constexpr std::size_t kChunkPaths = 32;
constexpr std::size_t kDriftSeries = 5;

constexpr const char* kScenarioNames[] = {"deterministic-1day", "deterministic-7day",
                                          "stochastic-1day", "stochastic-7day", "custom"};
constexpr const char* kObservableNames[] = {"c",      "a_sq",   "I1", "I3", "Omega1",
                                            "Omega2", "Omega3", "L1", "L2", "L3",
                                            "H",      "J2",     "f_geo"};

// Welford mean / M2 per (output time, series), merged with Chan's formula.
class SeriesAccumulator {
 public:
  SeriesAccumulator(std::size_t n_times, std::size_t n_series)
      : series_(n_series),
        count_(n_times * n_series, 0),
        mean_(n_times * n_series, 0.0),
        m2_(n_times * n_series, 0.0) {}

  void add(std::size_t time, std::size_t k, double x) {
    const std::size_t i = time * series_ + k;
    const double n = static_cast<double>(++count_[i]);
    const double d = x - mean_[i];
    mean_[i] += d / n;
    m2_[i] += d * (x - mean_[i]);
  }

  void merge(const SeriesAccumulator& o) {
    for (std::size_t i = 0; i < count_.size(); ++i) {
      if (o.count_[i] == 0) continue;
      if (count_[i] == 0) {
        count_[i] = o.count_[i];
        mean_[i] = o.mean_[i];
        m2_[i] = o.m2_[i];
        continue;
      }
      const double na = static_cast<double>(count_[i]);
      const double nb = static_cast<double>(o.count_[i]);
      const double n = na + nb;
      const double delta = o.mean_[i] - mean_[i];
      mean_[i] += delta * (nb / n);
      m2_[i] += o.m2_[i] + delta * delta * (na * nb / n);
      count_[i] += o.count_[i];
    }
  }

  SeriesStats stats(std::size_t k) const {
    const std::size_t n_times = count_.size() / series_;
    SeriesStats s;
    s.mean.resize(n_times);
    s.variance.resize(n_times);
    s.std_error.resize(n_times);
    for (std::size_t t = 0; t < n_times; ++t) {
      const std::size_t i = t * series_ + k;
      const double n = static_cast<double>(count_[i]);
      s.mean[t] = mean_[i];
      s.variance[t] = count_[i] > 1 ? m2_[i] / (n - 1.0) : 0.0;
      s.std_error[t] = count_[i] > 0 ? std::sqrt(s.variance[t] / n) : 0.0;
    }
    return s;
  }

 private:
  std::size_t series_;
  std::vector<std::uint64_t> count_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

void welford_merge(double& mean, double& m2, std::uint64_t na, double mean_b, double m2_b,
                   std::uint64_t nb) {
  if (nb == 0) return;
  if (na == 0) {
    mean = mean_b;
    m2 = m2_b;
    return;
  }
  const double a = static_cast<double>(na);
  const double b = static_cast<double>(nb);
  const double n = a + b;
  const double delta = mean_b - mean;
  mean += delta * (b / n);
  m2 += m2_b + delta * delta * (a * b / n);
}

double state_j2(const PathState& s, const EllipsoidParams& params) {
  const double a_sq = a_squared_from_c(s.c, params.volume);
  return (s.inertia[0] - s.inertia[2]) / (params.mass * a_sq);
}

struct ChunkResult {
  SeriesAccumulator series;
  DriftAccumulator drift;
  RunEvents events;
  std::vector<Trajectory> paths;
};

// Shared per-sample bookkeeping of one chunk. Each path gets its own drift
// accumulator, merged in path order at the end, so feeding time-major (batched
// lanes) or path-major (reference) gives identical sums.
class ChunkFeeder {
 public:
  ChunkFeeder(ChunkResult& r, const std::vector<Observable>& obs, const EllipsoidParams& params,
              double j2_initial, std::size_t n_times, std::size_t n_lanes)
      : r_(r),
        obs_(obs),
        params_(params),
        j2_0_(j2_initial),
        n_times_(n_times),
        lanes_(n_lanes, DriftAccumulator(params)) {}

  void feed(std::size_t lane, std::size_t ti, const Sample& s) {
    const SampleRow row = derive_row(s, params_, j2_0_);
    for (std::size_t k = 0; k < obs_.size(); ++k)
      r_.series.add(ti, k, observable_value(obs_[k], row));
    const std::size_t b = obs_.size();
    const double change = row.j2_minus_j20;
    const double integral = s.state.acc_drift + s.state.acc_ito;
    r_.series.add(ti, b + 0, change);
    r_.series.add(ti, b + 1, integral);
    r_.series.add(ti, b + 2, s.state.acc_ito);
    r_.series.add(ti, b + 3, s.state.acc_mart);
    r_.series.add(ti, b + 4, change - integral);
    DriftAccumulator& d = lanes_[lane];
    if (ti == 0)
      d.begin_path(s);
    else
      d.add(s);
    if (ti + 1 == n_times_) d.end_path(s);
  }

  void finish() {
    for (const auto& d : lanes_) r_.drift.merge(d);
  }

 private:
  ChunkResult& r_;
  const std::vector<Observable>& obs_;
  const EllipsoidParams& params_;
  double j2_0_;
  std::size_t n_times_;
  std::vector<DriftAccumulator> lanes_;
};

struct EnsembleJob {
  const EnsembleConfig& config;
  const DeformationLaw& law;
  const EllipsoidParams& params;
  const IntegratorConfig& integrator;
  const std::array<double, 3>& omega0;
  std::size_t n_times;
  double j2_initial;
  std::optional<simd::Backend> batch_backend;  // unset: per-path reference runner
};

ChunkResult new_chunk(const EnsembleJob& job) {
  return ChunkResult{SeriesAccumulator(job.n_times, job.config.observables.size() + kDriftSeries),
                     DriftAccumulator(job.params), RunEvents{}, {}};
}

void run_chunk_reference(const EnsembleJob& job, std::size_t first, std::size_t count,
                         ChunkResult& out) {
  ChunkFeeder feeder(out, job.config.observables, job.params, job.j2_initial, job.n_times,
                     count);
  for (std::size_t p = first; p < first + count; ++p) {
    std::size_t ti = 0;
    PathRunOptions opts;
    opts.path_index = p;
    opts.refine = job.config.brownian_refine;
    opts.keep_samples = job.config.keep_paths;
    opts.sink = [&](const Sample& s) { feeder.feed(p - first, ti++, s); };
    Trajectory traj = invariance_preserving_run(job.law, job.params, job.integrator, job.omega0, opts);
    out.events.merge(traj.events);
    if (job.config.keep_paths) out.paths.push_back(std::move(traj));
  }
  feeder.finish();
}

// Lock-step advance of a chunk through a toy-law kernel. Lanes the kernel
// rejects are finished by the scalar PathStepper, so every path follows the
// same arithmetic as run_chunk_reference.
void run_chunk_batched(const EnsembleJob& job, simd::Backend backend, std::size_t first,
                       std::size_t count, ChunkResult& out) {
  const ToyModelParams& toy = *job.law.toy;
  const IntegratorConfig& cfg = job.integrator;
  const std::size_t width = simd::lane_width(backend);
  const std::size_t lanes = (count + width - 1) / width * width;
  const simd::ToyStepKernel kernel = simd::toy_step_kernel(backend);

  std::vector<BrownianPath> noise;
  noise.reserve(count);
  const std::uint32_t refine = job.config.brownian_refine;
  for (std::size_t l = 0; l < count; ++l)
    noise.emplace_back(cfg.seed, first + l, cfg.h / refine, cfg.truncation_k, refine);
  std::vector<PathStepper> steppers;
  steppers.reserve(count);
  for (std::size_t l = 0; l < count; ++l)
    steppers.emplace_back(job.law, job.params, cfg, noise[l]);

  const PathState init = initial_path_state(job.params, job.omega0);
  simd::LaneBuffer buf(lanes);
  for (std::size_t l = 0; l < lanes; ++l) buf.set(l, init);
  const simd::LaneArrays view = buf.view();

  std::vector<double> db(lanes, 0.0);
  std::vector<std::uint8_t> rejected(lanes, 0);
  std::vector<RunEvents> events(count);
  std::vector<Trajectory> kept(job.config.keep_paths ? count : 0);
  for (auto& t : kept) {
    t.lower = job.law.lower;
    t.upper = job.law.upper;
    t.samples.reserve(cfg.steps() / cfg.decimate + 2);
  }

  simd::ToyStepInputs in;
  in.beta = toy.beta;
  in.lower = job.law.lower;
  in.upper = job.law.upper;
  in.h = cfg.h;
  in.max_increment = noise.front().max_abs_increment();
  in.consts = PhysConsts::from(job.params);

  ChunkFeeder feeder(out, job.config.observables, job.params, job.j2_initial, job.n_times,
                     count);
  std::size_t ti = 0;
  const auto emit = [&](double t) {
    for (std::size_t l = 0; l < count; ++l) {
      const Sample s{t, buf.get(l)};
      feeder.feed(l, ti, s);
      if (!kept.empty()) kept[l].samples.push_back(s);
    }
    ++ti;
  };

  const std::uint64_t steps = cfg.steps();
  const bool deterministic = job.law.deterministic;
  emit(0.0);
  for (std::uint64_t n = 0; n < steps; ++n) {
    const double t = steppers.front().time(n);
    in.alpha_cos = toy.alpha * std::cos(toy.gamma * t);
    if (!deterministic)
      for (std::size_t l = 0; l < count; ++l) db[l] = noise[l].increment(n);
    const std::size_t n_rejected = kernel(view, db.data(), in, rejected.data());
    for (std::size_t l = 0; l < count; ++l) {
      if (n_rejected != 0 && rejected[l]) {
        PathState s = buf.get(l);
        steppers[l].advance(s, n, events[l]);
        buf.set(l, s);
      } else {
        ++events[l].steps;
      }
    }
    if ((n + 1) % cfg.decimate == 0 || n + 1 == steps) emit(steppers.front().time(n + 1));
  }

  feeder.finish();
  for (std::size_t l = 0; l < count; ++l) {
    out.events.merge(events[l]);
    if (!kept.empty()) {
      kept[l].events = events[l];
      out.paths.push_back(std::move(kept[l]));
    }
  }
}

std::vector<double> output_times(const IntegratorConfig& cfg) {
  std::vector<double> t{0.0};
  const std::uint64_t steps = cfg.steps();
  for (std::uint64_t n = 0; n < steps; ++n)
    if ((n + 1) % cfg.decimate == 0 || n + 1 == steps)
      t.push_back(static_cast<double>(n + 1) * cfg.h);
  return t;
}

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::vector<double> log_of(std::span<const double> x) {
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::log(v); });
  return out;
}

}  // namespace

const char* to_string(Scenario s) { return kScenarioNames[static_cast<int>(s)]; }

std::optional<Scenario> parse_scenario(const std::string& s) {
  for (int i = 0; i < 5; ++i)
    if (s == kScenarioNames[i]) return static_cast<Scenario>(i);
  return std::nullopt;
}

const char* to_string(Observable o) { return kObservableNames[static_cast<int>(o)]; }

std::optional<Observable> parse_observable(const std::string& s) {
  for (int i = 0; i < 13; ++i)
    if (s == kObservableNames[i]) return static_cast<Observable>(i);
  return std::nullopt;
}

std::vector<Observable> all_observables() {
  std::vector<Observable> out;
  for (int i = 0; i < 13; ++i) out.push_back(static_cast<Observable>(i));
  return out;
}

SampleRow derive_row(const Sample& s, const EllipsoidParams& params, double j2_initial) {
  const PathState& p = s.state;
  EllipsoidState e;
  e.t = s.t;
  e.c = p.c;
  e.a_sq = a_squared_from_c(p.c, params.volume);
  e.i1 = p.inertia[0];
  e.i2 = p.inertia[1];
  e.i3 = p.inertia[2];
  const FlatteningObservables obs = observables(e, params);

  SampleRow r;
  r.t = s.t;
  r.c = p.c;
  r.c_minus_c0 = p.c - params.c0;
  r.a_sq = e.a_sq;
  r.i1 = p.inertia[0];
  r.i3 = p.inertia[2];
  for (int i = 0; i < 3; ++i) {
    r.omega[i] = p.omega[i];
    r.l[i] = p.inertia[i] * p.omega[i];
  }
  r.h = obs.dynamical;
  r.j2 = obs.j2;
  r.j2_minus_j20 = obs.j2 - j2_initial;
  r.f_geo = obs.f_geo;
  return r;
}

double observable_value(Observable o, const SampleRow& r) {
  switch (o) {
    case Observable::c: return r.c;
    case Observable::a_sq: return r.a_sq;
    case Observable::i1: return r.i1;
    case Observable::i3: return r.i3;
    case Observable::omega1: return r.omega[0];
    case Observable::omega2: return r.omega[1];
    case Observable::omega3: return r.omega[2];
    case Observable::l1: return r.l[0];
    case Observable::l2: return r.l[1];
    case Observable::l3: return r.l[2];
    case Observable::h: return r.h;
    case Observable::j2: return r.j2;
    case Observable::f_geo: return r.f_geo;
  }
  return 0.0;
}

double polar_motion_amplitude(const Trajectory& traj, const EllipsoidParams& params) {
  double best = 0.0;
  for (const Sample& s : traj.samples) {
    const auto& w = s.state.omega;
    const double a = std::sqrt(a_squared_from_c(s.state.c, params.volume));
    best = std::max(best, std::hypot(w[0], w[1]) / std::abs(w[2]) * a);
  }
  return best;
}

void EnsembleConfig::validate() const {
  if (n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
  if (n_paths > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("n_paths must fit in 32 bits");
  if (brownian_refine == 0) throw std::invalid_argument("brownian_refine must be >= 1");
  if (backend && !simd::backend_available(*backend))
    throw std::invalid_argument(std::string("backend not available: ") +
                                simd::to_string(*backend));
}

std::vector<double> DriftDecomposition::residual_in_se() const {
  std::vector<double> out(residual.mean.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (residual.std_error[i] > 0.0) out[i] = residual.mean[i] / residual.std_error[i];
  return out;
}

double DriftValidationReport::max_pairwise_rms() const {
  return std::max({rms_integrated_vs_state, rms_state_vs_integral, rms_integrated_vs_integral});
}

double DriftValidationReport::ito_to_noise_ratio() const {
  if (martingale_se > 0.0) return std::abs(ito_mean) / martingale_se;
  return ito_mean != 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

bool DriftValidationReport::martingale_within_3se() const {
  return std::abs(martingale_mean) <= 3.0 * martingale_se;
}

std::string DriftValidationReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "paths=" << paths << " samples=" << samples << "\n"
     << "  rms |J2_int - J2_state|    = " << rms_integrated_vs_state << "\n"
     << "  rms |J2_state - J2_intgl|  = " << rms_state_vs_integral << "\n"
     << "  rms |J2_int - J2_intgl|    = " << rms_integrated_vs_integral << "\n"
     << "  max |dJ2 + 2/5 dH|         = " << max_identity_gap << "\n"
     << "  Ito term at t_end          = " << ito_mean << " +/- " << ito_se << "\n"
     << "  martingale at t_end        = " << martingale_mean << " +/- " << martingale_se
     << "\n"
     << "  Ito / MC noise             = " << ito_to_noise_ratio()
     << (ito_resolved() ? " (resolved)" : " (below noise)") << "\n";
  return os.str();
}

void DriftAccumulator::begin_path(const Sample& first) {
  if (paths_ == 0) {
    j2_0_ = first.state.j2_int;
    h_0_ = first.state.h_int;
  }
  ++paths_;
  add(first);
}

void DriftAccumulator::add(const Sample& s) {
  const PathState& p = s.state;
  const double j_int = p.j2_int;
  const double j_state = state_j2(p, params_);
  const double j_integral = j2_0_ + p.acc_c2dc + p.acc_ito;
  ss_int_state_ += (j_int - j_state) * (j_int - j_state);
  ss_state_integral_ += (j_state - j_integral) * (j_state - j_integral);
  ss_int_integral_ += (j_int - j_integral) * (j_int - j_integral);
  max_gap_ = std::max(max_gap_, std::abs((j_int - j2_0_) + 0.4 * (p.h_int - h_0_)));
  ++samples_;
}

void DriftAccumulator::end_path(const Sample& last) {
  const double n = static_cast<double>(paths_);
  const double ito = last.state.acc_ito;
  const double d1 = ito - ito_mean_;
  ito_mean_ += d1 / n;
  ito_m2_ += d1 * (ito - ito_mean_);
  const double mart = last.state.acc_mart;
  const double d2 = mart - mart_mean_;
  mart_mean_ += d2 / n;
  mart_m2_ += d2 * (mart - mart_mean_);
}

void DriftAccumulator::merge(const DriftAccumulator& o) {
  if (o.paths_ == 0) return;
  if (paths_ == 0) {
    j2_0_ = o.j2_0_;
    h_0_ = o.h_0_;
  }
  welford_merge(ito_mean_, ito_m2_, paths_, o.ito_mean_, o.ito_m2_, o.paths_);
  welford_merge(mart_mean_, mart_m2_, paths_, o.mart_mean_, o.mart_m2_, o.paths_);
  paths_ += o.paths_;
  samples_ += o.samples_;
  ss_int_state_ += o.ss_int_state_;
  ss_state_integral_ += o.ss_state_integral_;
  ss_int_integral_ += o.ss_int_integral_;
  max_gap_ = std::max(max_gap_, o.max_gap_);
}

DriftValidationReport DriftAccumulator::report() const {
  DriftValidationReport r;
  r.paths = paths_;
  r.samples = samples_;
  r.j2_initial = j2_0_;
  r.max_identity_gap = max_gap_;
  if (samples_ > 0) {
    const double n = static_cast<double>(samples_);
    r.rms_integrated_vs_state = std::sqrt(ss_int_state_ / n);
    r.rms_state_vs_integral = std::sqrt(ss_state_integral_ / n);
    r.rms_integrated_vs_integral = std::sqrt(ss_int_integral_ / n);
  }
  r.ito_mean = ito_mean_;
  r.martingale_mean = mart_mean_;
  if (paths_ > 1) {
    const double n = static_cast<double>(paths_);
    r.ito_se = std::sqrt(ito_m2_ / (n - 1.0) / n);
    r.martingale_se = std::sqrt(mart_m2_ / (n - 1.0) / n);
  }
  return r;
}

DriftValidationReport drift_validation(std::span<const Trajectory> paths,
                                       const EllipsoidParams& params) {
  DriftAccumulator acc(params);
  for (const Trajectory& t : paths) {
    if (t.samples.empty()) continue;
    acc.begin_path(t.samples.front());
    for (std::size_t i = 1; i < t.samples.size(); ++i) acc.add(t.samples[i]);
    acc.end_path(t.samples.back());
  }
  return acc.report();
}

EnsembleSummary run_ensemble(const EnsembleConfig& config, const DeformationLaw& law,
                             const EllipsoidParams& params, const IntegratorConfig& integrator,
                             const std::array<double, 3>& omega0) {
  config.validate();
  integrator.validate();
  params.validate();
  if (!(law.lower < law.upper) || !(law.lower > 0.0))
    throw std::invalid_argument("deformation law bounds must satisfy 0 < lo < hi");

  const std::vector<double> times = output_times(integrator);
  const PathState init = initial_path_state(params, omega0);

  std::optional<simd::Backend> batch;
  const simd::Backend chosen = config.backend.value_or(simd::best_backend());
  const bool batchable = law.toy.has_value() &&
                         integrator.boundary_policy == BoundaryPolicy::shrink_step;
  if (batchable) batch = chosen;

  const EnsembleJob job{config, law, params, integrator, omega0, times.size(), init.j2_int, batch};

  const std::size_t n_chunks = (config.n_paths + kChunkPaths - 1) / kChunkPaths;
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(config.threads), n_chunks));

  ChunkResult total = new_chunk(job);
  for (std::size_t wave = 0; wave < n_chunks; wave += threads) {
    const std::size_t in_wave = std::min<std::size_t>(threads, n_chunks - wave);
    std::vector<std::optional<ChunkResult>> results(in_wave);
    std::vector<std::exception_ptr> errors(in_wave);
    const auto work = [&](std::size_t j) {
      try {
        const std::size_t chunk = wave + j;
        const std::size_t first = chunk * kChunkPaths;
        const std::size_t count = std::min(kChunkPaths, config.n_paths - first);
        ChunkResult r = new_chunk(job);
        if (batch)
          run_chunk_batched(job, *batch, first, count, r);
        else
          run_chunk_reference(job, first, count, r);
        results[j].emplace(std::move(r));
      } catch (...) {
        errors[j] = std::current_exception();
      }
    };
    if (in_wave == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < in_wave; ++j) pool.emplace_back(work, j);
      for (auto& th : pool) th.join();
    }
    for (std::size_t j = 0; j < in_wave; ++j) {
      if (errors[j]) std::rethrow_exception(errors[j]);
      total.series.merge(results[j]->series);
      total.drift.merge(results[j]->drift);
      total.events.merge(results[j]->events);
      for (auto& p : results[j]->paths) total.paths.push_back(std::move(p));
    }
  }

  EnsembleSummary out;
  out.n_paths = config.n_paths;
  out.backend = batch ? simd::to_string(*batch) : "reference";
  out.times = times;
  out.observables = config.observables;
  const std::size_t b = config.observables.size();
  for (std::size_t k = 0; k < b; ++k) out.stats.push_back(total.series.stats(k));
  out.drift.j2_change = total.series.stats(b + 0);
  out.drift.drift_integral = total.series.stats(b + 1);
  out.drift.ito_term = total.series.stats(b + 2);
  out.drift.martingale = total.series.stats(b + 3);
  out.drift.residual = total.series.stats(b + 4);
  out.validation = total.drift.report();
  out.events = std::move(total.events);
  out.paths = std::move(total.paths);
  return out;
}

double loglog_slope(std::span<const double> h, std::span<const double> err) {
  if (h.size() != err.size() || h.size() < 2)
    throw std::invalid_argument("loglog_slope needs at least two matching points");
  const std::vector<double> x = log_of(h);
  const std::vector<double> y = log_of(err);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

namespace {

struct LevelPlan {
  std::vector<double> h;
  std::vector<std::uint32_t> refine;
  std::vector<std::uint64_t> steps;
  double fine = 0.0;
};

LevelPlan plan_levels(std::span<const double> h_list, double t_end, std::size_t min_levels) {
  if (h_list.size() < min_levels)
    throw std::invalid_argument("convergence study needs at least " +
                                std::to_string(min_levels) + " step sizes");
  LevelPlan p;
  p.h.assign(h_list.begin(), h_list.end());
  for (std::size_t i = 0; i < p.h.size(); ++i) {
    if (!(p.h[i] > 0.0)) throw std::invalid_argument("step sizes must be positive");
    if (i > 0 && !(p.h[i] < p.h[i - 1]))
      throw std::invalid_argument("step sizes must be strictly decreasing");
  }
  p.fine = p.h.back();
  const auto fine_steps = static_cast<std::uint64_t>(std::llround(t_end / p.fine));
  if (fine_steps == 0) throw std::invalid_argument("t_end shorter than the finest step");
  for (double h : p.h) {
    const double ratio = h / p.fine;
    const auto r = static_cast<std::uint32_t>(std::llround(ratio));
    if (std::abs(ratio - r) > 1e-9 * ratio)
      throw std::invalid_argument("each step size must be an integer multiple of the finest");
    const auto n = static_cast<std::uint64_t>(std::llround(t_end / h));
    if (n * r != fine_steps)
      throw std::invalid_argument("t_end must be a whole number of steps at every level");
    p.refine.push_back(r);
    p.steps.push_back(n);
  }
  return p;
}

// errors[p * n_levels + l]; returns the per-level mean and SE plus the slope
// with a percentile bootstrap over paths.
ConvergenceResult summarise(const std::vector<double>& errors, std::size_t n_paths,
                            const std::vector<double>& h, std::uint64_t seed) {
  const std::size_t L = h.size();
  ConvergenceResult r;
  std::vector<double> mean(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double x = errors[p * L + l];
      const double d = x - m;
      m += d / static_cast<double>(p + 1);
      m2 += d * (x - m);
    }
    mean[l] = m;
    const double n = static_cast<double>(n_paths);
    const double se = n_paths > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    r.levels.push_back({h[l], m, se});
  }
  r.slope = loglog_slope(h, mean);

  constexpr int kResamples = 400;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, n_paths - 1);
  std::vector<double> slopes;
  slopes.reserve(kResamples);
  std::vector<double> bm(L);
  for (int b = 0; b < kResamples; ++b) {
    std::fill(bm.begin(), bm.end(), 0.0);
    for (std::size_t i = 0; i < n_paths; ++i) {
      const std::size_t p = pick(rng);
      for (std::size_t l = 0; l < L; ++l) bm[l] += errors[p * L + l];
    }
    if (std::any_of(bm.begin(), bm.end(), [](double v) { return !(v > 0.0); })) continue;
    slopes.push_back(loglog_slope(h, bm));
  }
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    const auto at = [&](double q) {
      const auto i = static_cast<std::size_t>(q * static_cast<double>(slopes.size() - 1));
      return slopes[i];
    };
    r.slope_ci_low = at(0.025);
    r.slope_ci_high = at(0.975);
  }
  return r;
}

}  // namespace

ConvergenceResult convergence_study(const DeformationLaw& law, const EllipsoidParams& params,
                                    const IntegratorConfig& base,
                                    const std::array<double, 3>& omega0,
                                    std::span<const double> h_list, std::size_t n_paths) {
  if (n_paths < 2) throw std::invalid_argument("convergence study needs at least two paths");
  params.validate();
  const LevelPlan plan = plan_levels(h_list, base.t_end, 3);
  const std::size_t L = plan.h.size();
  const std::size_t coarse = L - 1;  // the finest level is the reference

  std::vector<IntegratorConfig> cfg(L, base);
  for (std::size_t l = 0; l < L; ++l) {
    cfg[l].h = plan.h[l];
    cfg[l].validate();
  }
  const PathState init = initial_path_state(params, omega0);

  std::vector<double> errors(n_paths * coarse);
  RunEvents sink;
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::vector<double> final_c(L);
    for (std::size_t l = 0; l < L; ++l) {
      const BrownianPath noise(base.seed, p, plan.fine, base.truncation_k, plan.refine[l]);
      const PathStepper stepper(law, params, cfg[l], noise);
      PathState s = init;
      for (std::uint64_t n = 0; n < plan.steps[l]; ++n) stepper.advance(s, n, sink);
      final_c[l] = s.c;
    }
    for (std::size_t l = 0; l < coarse; ++l)
      errors[p * coarse + l] = std::abs(final_c[l] - final_c[coarse]);
  }
  std::vector<double> h(plan.h.begin(), plan.h.begin() + static_cast<std::ptrdiff_t>(coarse));
  ConvergenceResult r = summarise(errors, n_paths, h, base.seed);
  r.reference_h = plan.fine;
  return r;
}

ConvergenceResult gbm_convergence(double mu, double sigma, double x0, double t_end,
                                  std::span<const double> h_list, std::size_t n_paths,
                                  std::uint64_t seed, double truncation_k) {
  if (n_paths < 2) throw std::invalid_argument("convergence study needs at least two paths");
  const LevelPlan plan = plan_levels(h_list, t_end, 2);
  const std::size_t L = plan.h.size();
  std::vector<double> errors(n_paths * L);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const BrownianPath fine(seed, p, plan.fine, truncation_k, 1);
    double w = 0.0;
    for (std::uint64_t n = 0; n < plan.steps.back(); ++n) w += fine.increment(n);
    const double exact = x0 * std::exp((mu - 0.5 * sigma * sigma) * t_end + sigma * w);
    for (std::size_t l = 0; l < L; ++l) {
      const BrownianPath noise(seed, p, plan.fine, truncation_k, plan.refine[l]);
      const auto coeffs = [&](double, const std::array<double, 1>& x) {
        return std::pair{std::array<double, 1>{mu * x[0]}, std::array<double, 1>{sigma * x[0]}};
      };
      std::array<double, 1> x{x0};
      for (std::uint64_t n = 0; n < plan.steps[l]; ++n)
        x = euler_maruyama_step(x, static_cast<double>(n) * plan.h[l], coeffs, plan.h[l],
                                noise.increment(n));
      errors[p * L + l] = std::abs(x[0] - exact);
    }
  }
  return summarise(errors, n_paths, plan.h, seed);
}

DriftConsistencyResult drift_consistency_study(const EnsembleConfig& ensemble,
                                               const DeformationLaw& law,
                                               const EllipsoidParams& params,
                                               const IntegratorConfig& base,
                                               const std::array<double, 3>& omega0,
                                               unsigned halvings) {
  if (halvings == 0 || halvings > 10) throw std::invalid_argument("halvings must be in [1, 10]");
  DriftConsistencyResult out;
  std::vector<double> h, a, b, c;
  for (unsigned j = 0; j <= halvings; ++j) {
    IntegratorConfig cfg = base;
    cfg.h = std::ldexp(base.h, -static_cast<int>(j));
    cfg.decimate = base.decimate << j;
    EnsembleConfig ec = ensemble;
    ec.keep_paths = false;
    ec.brownian_refine = ensemble.brownian_refine << (halvings - j);
    const EnsembleSummary s = run_ensemble(ec, law, params, cfg, omega0);
    out.levels.push_back({cfg.h, s.validation});
    h.push_back(cfg.h);
    a.push_back(s.validation.rms_integrated_vs_state);
    b.push_back(s.validation.rms_state_vs_integral);
    c.push_back(s.validation.rms_integrated_vs_integral);
  }
  out.slope_integrated_vs_state = loglog_slope(h, a);
  out.slope_state_vs_integral = loglog_slope(h, b);
  out.slope_integrated_vs_integral = loglog_slope(h, c);
  return out;
}

}  // namespace stochrot

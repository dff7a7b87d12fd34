#pragma once

// Monte Carlo ensembles over independent Brownian paths, validation of the
// Ito drift in J2, and strong-convergence studies.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochrot/core.hpp"
#include "stochrot/deformation.hpp"
#include "stochrot/integrate.hpp"
#include "stochrot/simd/dispatch.hpp"

namespace stochrot {

enum class Scenario { deterministic_1day, deterministic_7day, stochastic_1day, stochastic_7day, custom };

const char* to_string(Scenario s);
std::optional<Scenario> parse_scenario(const std::string& s);

enum class Observable { c, a_sq, i1, i3, omega1, omega2, omega3, l1, l2, l3, h, j2, f_geo };

const char* to_string(Observable o);
std::optional<Observable> parse_observable(const std::string& s);
std::vector<Observable> all_observables();

/// Everything written per output time, derived from one sample.
struct SampleRow {
  double t, c, c_minus_c0, a_sq, i1, i3;
  double omega[3];
  double l[3];
  double h, j2, j2_minus_j20, f_geo;
};

/// H and J2 come from the integrated inertia with a^2 recomputed from c.
SampleRow derive_row(const Sample& s, const EllipsoidParams& params, double j2_initial);
double observable_value(Observable o, const SampleRow& row);

/// Largest sqrt(W1^2 + W2^2) / W3 * a over the samples, i.e. the radius of
/// the polar-motion circle in units of the equatorial radius.
double polar_motion_amplitude(const Trajectory& traj, const EllipsoidParams& params);

struct EnsembleConfig {
  std::size_t n_paths = 1;
  std::vector<Observable> observables{Observable::c, Observable::h, Observable::j2};
  Scenario scenario = Scenario::custom;
  /// 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Unset selects the widest available kernel.
  std::optional<simd::Backend> backend;
  /// Keep every path's samples in the summary.
  bool keep_paths = false;
  std::uint32_t brownian_refine = 1;

  void validate() const;
};

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> std_error;  // sqrt(variance / n_paths)
};

/// Per output time: J2(t) - J2(0) against its drift integral
/// kappa (int c^2 f ds + int c g^2 ds), with the martingale part
/// kappa int c^2 g dB and the pure Ito term split out.
struct DriftDecomposition {
  SeriesStats j2_change;
  SeriesStats drift_integral;
  SeriesStats ito_term;
  SeriesStats martingale;
  SeriesStats residual;  // j2_change - drift_integral, per path

  /// residual mean / residual standard error at each time (0 when both vanish).
  std::vector<double> residual_in_se() const;
};

/// Three routes to J2 along each path:
///   integrated  J2 advanced with its own Ito increments,
///   state       (I1 - I3) / (M a^2) from the integrated inertia,
///   integral    J2(0) + kappa sum c^2 dc + kappa sum c g^2 h.
struct DriftValidationReport {
  std::uint64_t paths = 0;
  std::uint64_t samples = 0;
  double rms_integrated_vs_state = 0.0;
  double rms_state_vs_integral = 0.0;
  double rms_integrated_vs_integral = 0.0;
  /// max |(J2_int - J2_0) + 2/5 (H_int - H_0)|.
  double max_identity_gap = 0.0;
  double j2_initial = 0.0;

  // Terminal-time statistics across paths.
  double ito_mean = 0.0;
  double ito_se = 0.0;
  double martingale_mean = 0.0;
  double martingale_se = 0.0;

  double max_pairwise_rms() const;
  /// Ito term relative to the Monte Carlo noise of the martingale part.
  double ito_to_noise_ratio() const;
  bool ito_resolved() const { return ito_to_noise_ratio() > 3.0; }
  bool martingale_within_3se() const;
  std::string summary() const;
};

/// Streaming form of drift_validation(); paths must be fed in order.
class DriftAccumulator {
 public:
  explicit DriftAccumulator(const EllipsoidParams& params) : params_(params) {}

  void begin_path(const Sample& first);
  void add(const Sample& s);
  void end_path(const Sample& last);
  /// Appends another accumulator's paths after this one's.
  void merge(const DriftAccumulator& other);
  DriftValidationReport report() const;

 private:
  EllipsoidParams params_;
  double j2_0_ = 0.0;
  double h_0_ = 0.0;
  std::uint64_t paths_ = 0;
  std::uint64_t samples_ = 0;
  double ss_int_state_ = 0.0;
  double ss_state_integral_ = 0.0;
  double ss_int_integral_ = 0.0;
  double max_gap_ = 0.0;
  double ito_mean_ = 0.0, ito_m2_ = 0.0;
  double mart_mean_ = 0.0, mart_m2_ = 0.0;
};

DriftValidationReport drift_validation(std::span<const Trajectory> paths,
                                       const EllipsoidParams& params);

struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::string backend;
  std::vector<double> times;
  std::vector<Observable> observables;
  std::vector<SeriesStats> stats;  // parallel to observables
  DriftDecomposition drift;
  DriftValidationReport validation;
  RunEvents events;
  std::vector<Trajectory> paths;  // only with keep_paths
};

/// Paths are grouped in fixed chunks and reduced in path-index order, so the
/// summary does not depend on thread count or backend. Integration aborts
/// propagate as IntegrationAborted carrying the path index and seed.
EnsembleSummary run_ensemble(const EnsembleConfig& config, const DeformationLaw& law,
                             const EllipsoidParams& params, const IntegratorConfig& integrator,
                             const std::array<double, 3>& omega0);

struct ConvergenceLevel {
  double h = 0.0;
  double strong_error = 0.0;  // mean |x_h(T) - x_ref(T)|
  double error_se = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;  // reference level excluded
  double reference_h = 0.0;              // 0 for an exact reference
  double slope = 0.0;
  double slope_ci_low = 0.0;   // 95% percentile bootstrap over paths
  double slope_ci_high = 0.0;
};

/// Self-convergence of c(t_end) against the finest level, all levels driven
/// by one Brownian path per sample. h_list must be descending with at least
/// three entries, each an integer multiple of the finest.
ConvergenceResult convergence_study(const DeformationLaw& law, const EllipsoidParams& params,
                                    const IntegratorConfig& base,
                                    const std::array<double, 3>& omega0,
                                    std::span<const double> h_list, std::size_t n_paths);

/// Euler-Maruyama on dx = mu x dt + sigma x dB against the exact solution
/// x0 exp((mu - sigma^2/2) T + sigma B_T).
ConvergenceResult gbm_convergence(double mu, double sigma, double x0, double t_end,
                                  std::span<const double> h_list, std::size_t n_paths,
                                  std::uint64_t seed, double truncation_k = 6.0);

/// Least-squares slope of log(error) against log(h).
double loglog_slope(std::span<const double> h, std::span<const double> err);

struct DriftConsistencyLevel {
  double h = 0.0;
  DriftValidationReport report;
};

struct DriftConsistencyResult {
  std::vector<DriftConsistencyLevel> levels;
  double slope_integrated_vs_state = 0.0;
  double slope_state_vs_integral = 0.0;
  double slope_integrated_vs_integral = 0.0;
};

/// Runs the same ensemble at h, h/2, h/4 ... (`halvings` + 1 levels) on
/// shared Brownian paths and fits the decay of each pairwise RMS.
DriftConsistencyResult drift_consistency_study(const EnsembleConfig& ensemble,
                                               const DeformationLaw& law,
                                               const EllipsoidParams& params,
                                               const IntegratorConfig& base,
                                               const std::array<double, 3>& omega0,
                                               unsigned halvings = 2);

}  // namespace stochrot

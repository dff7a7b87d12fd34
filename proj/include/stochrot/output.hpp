#pragma once

// CSV and manifest writers. Numbers are written with 17 significant digits
// so every value round-trips exactly.

#include <array>
#include <string>
#include <string_view>

#include "json.hpp"
#include "stochrot/experiments.hpp"

namespace stochrot {

inline constexpr std::array<std::string_view, 16> kTrajectoryColumns{
    "t",      "c",      "c_minus_c0", "a_sq", "I1", "I3", "Omega1",       "Omega2",
    "Omega3", "L1",     "L2",         "L3",   "H",  "J2", "J2_minus_J20", "f_geo"};

/// 17 significant digits, like "%.17g" but independent of the C locale.
std::string format_double(double x);

/// Throws std::runtime_error when the file cannot be written.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const EllipsoidParams& params, double j2_initial);

/// t, then <observable>_mean, <observable>_se for each observable, then the
/// J2 drift decomposition columns.
void write_summary_csv(const std::string& path, const EnsembleSummary& summary);

/// Rows of (h, strong_error, error_se).
void write_convergence_csv(const std::string& path, const ConvergenceResult& r);
/// One row: slope, slope_ci_low, slope_ci_high, reference_h.
void write_convergence_fit_csv(const std::string& path, const ConvergenceResult& r);

void write_json(const std::string& path, const nlohmann::json& j);

/// Creates the directory (and parents); throws std::runtime_error on failure.
void ensure_directory(const std::string& dir);

std::string path_file_name(std::size_t path_index);

}  // namespace stochrot

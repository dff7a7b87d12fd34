#pragma once

// Run configuration: JSON files layered over built-in presets.
//
// Grammar (every key optional; unknown keys are rejected):
//
//   {
//     "preset": "<name>",                       base preset for this file
//     "name": "<label>",
//     "ellipsoid":   {"a0", "c0", "mass", "d_min", "d_max"},
//     "deformation": {"alpha", "beta", "gamma",
//                     "drift": "toy|zero|constant|restoring", "drift_coef",
//                     "diffusion": "toy|zero|constant|linear_lower|linear_upper",
//                     "diffusion_coef"},
//     "rotation":    {"omega0": [w1, w2, w3]},
//     "integrator":  {"h", "t_end" | "t_end_days", "seed", "truncation_k",
//                     "boundary_policy": "shrink-step|clamp-with-log",
//                     "decimate", "max_halvings"},
//     "ensemble":    {"n_paths", "observables": [...], "threads",
//                     "backend": "auto|scalar|avx2|neon", "scenario"},
//     "convergence": {"h_list": [...], "n_paths", "t_end" | "t_end_days"},
//     "output":      {"dir"}
//   }

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stochrot/core.hpp"
#include "stochrot/deformation.hpp"
#include "stochrot/experiments.hpp"
#include "stochrot/integrate.hpp"

namespace stochrot {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConvergenceConfig {
  std::vector<double> h_list{1e-3, 1e-4, 1e-5};
  std::size_t n_paths = 100;
  double t_end = 1.0;
};

struct RunConfig {
  std::string name = "custom";

  double a0 = 1.0;
  double c0 = 1.0;
  double mass = 1.0;
  double d_min = -0.1;
  double d_max = 0.1;

  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  LawSpec law_spec;

  std::array<double, 3> omega0{0.0, 0.0, 1.0};

  IntegratorConfig integrator;
  EnsembleConfig ensemble;
  ConvergenceConfig convergence;
  std::string output_dir = "out";

  EllipsoidParams ellipsoid() const;
  ToyModelParams toy() const;
  DeformationLaw law() const;

  /// Validates every embedded type; throws ConfigError.
  void validate() const;
};

/// Toy model with the reference parameters of the deforming-Earth study:
/// a0 = 1, c0 = sqrt(298/300), M = 1, d_max = a0 - c0 = -d_min,
/// alpha = 1e-3, beta = 1e-4, gamma = 10, Omega = (5e-7, 0, 1), h = 1e-4,
/// one day.
RunConfig default_config();

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

/// Overlays the keys present in `j` onto `cfg`. Throws ConfigError.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

/// Reads a JSON file and overlays it on a base: `preset_override` if given,
/// else the file's "preset" key, else default_config(). Throws ConfigError
/// for unreadable or malformed files.
RunConfig load_config_file(const std::string& path,
                           const std::optional<std::string>& preset_override = std::nullopt);

}  // namespace stochrot

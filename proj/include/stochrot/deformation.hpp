#pragma once

// Deformation laws dc = f(t, c) dt + g(t, c) dB for the polar semi-axis and
// the invariance (admissibility) checks on [c0 + d_min, c0 + d_max].

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochrot/core.hpp"

namespace stochrot {

/// Parameters of the polynomial toy deformation
///   f = alpha cos(gamma t) (x - lo)(hi - x),  g = beta (x - lo)(hi - x).
struct ToyModelParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double c0 = 1.0;
  double d_min = -0.1;
  double d_max = 0.1;

  double lower() const { return c0 + d_min; }
  double upper() const { return c0 + d_max; }
  void validate() const;
};

double toy_drift(const ToyModelParams& p, double t, double x);
double toy_diffusion(const ToyModelParams& p, double x);

using RateFn = std::function<double(double t, double c)>;

struct DeformationLaw {
  RateFn drift;
  RateFn diffusion;  // identically zero for deterministic laws
  double lower = 0.0;
  double upper = 0.0;
  bool deterministic = false;
  /// Set when the law is exactly the factored toy polynomial; enables the
  /// structural admissibility proof and the batched SIMD kernels.
  std::optional<ToyModelParams> toy;
  std::string description;
};

DeformationLaw make_toy_law(const ToyModelParams& p);

enum class DriftForm { toy, zero, constant, restoring };
enum class DiffusionForm { toy, zero, constant, linear_lower, linear_upper };

/// Mix-and-match law used by configuration overrides. `coef` feeds the
/// non-toy forms: constant value, restoring rate, or linear slope.
struct LawSpec {
  DriftForm drift = DriftForm::toy;
  double drift_coef = 0.0;
  DiffusionForm diffusion = DiffusionForm::toy;
  double diffusion_coef = 0.0;
};

DeformationLaw make_law(const ToyModelParams& p, const LawSpec& spec);

const char* to_string(DriftForm f);
const char* to_string(DiffusionForm f);
std::optional<DriftForm> parse_drift_form(const std::string& s);
std::optional<DiffusionForm> parse_diffusion_form(const std::string& s);

enum class Boundary { lower, upper };

struct Violation {
  enum class Kind { drift_sign, diffusion_nonzero };
  double t = 0.0;
  Boundary boundary = Boundary::lower;
  Kind kind = Kind::drift_sign;
  double value = 0.0;
};

struct AdmissibilityReport {
  bool admissible = true;
  bool stochastic = false;
  /// The law is the factored toy model with alpha, beta >= 0, which is
  /// admissible for every t, not only on the sampled grid.
  bool structurally_proven = false;
  std::size_t points_checked = 0;
  std::vector<Violation> violations;

  std::string summary() const;
};

/// f(t, lo) >= 0 and f(t, hi) <= 0 on every grid time.
AdmissibilityReport check_deterministic_admissible(const DeformationLaw& law,
                                                   std::span<const double> t_grid);

/// The deterministic conditions plus g(t, lo) == g(t, hi) == 0 exactly.
AdmissibilityReport check_stochastic_admissible(const DeformationLaw& law,
                                                std::span<const double> t_grid);

/// Admissible for all t >= 0 by construction (both factors vanish at the
/// bounds and the coefficients are non-negative).
bool toy_structurally_admissible(const ToyModelParams& p);

/// n evenly spaced times on [0, t_max].
std::vector<double> uniform_grid(double t_max, std::size_t n);

}  // namespace stochrot

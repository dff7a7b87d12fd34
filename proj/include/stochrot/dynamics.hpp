#pragma once

// Drift and diffusion of the coupled (Omega, I, c) system, deterministic and
// Ito forms, and the induced increments of H and J2.

#include <array>

#include "stochrot/core.hpp"
#include "stochrot/deformation.hpp"
#include "stochrot/formulas.hpp"

namespace stochrot {

struct SystemState {
  double t = 0.0;
  std::array<double, 3> omega{};
  std::array<double, 3> inertia{};
  double c = 0.0;

  /// Throws std::domain_error unless every inertia component is positive.
  void validate() const;
};

/// Component order: Omega1..3, I1..3, c.
inline constexpr std::size_t kSystemDim = 7;
using SystemVector = std::array<double, kSystemDim>;

struct SystemIncrement {
  SystemVector drift{};
  SystemVector diffusion{};
};

struct InertiaCoefficients {
  std::array<double, 3> h{};
  std::array<double, 3> m{};
};

struct FlatteningIncrements {
  double h_drift = 0.0;
  double h_diffusion = 0.0;
  double j2_drift = 0.0;
  double j2_diffusion = 0.0;
  /// The parts of the drifts that exist only because of the Ito correction.
  double h_ito = 0.0;
  double j2_ito = 0.0;
};

/// (l1, l2, l3) = ((I1-I3) W2 W3, -(I1-I3) W1 W3, 0).
std::array<double, 3> torque_terms(const std::array<double, 3>& inertia,
                                   const std::array<double, 3>& omega);

/// dI/dt for a deterministic law (diffusion ignored).
std::array<double, 3> deterministic_inertia_rates(const DeformationLaw& law,
                                                  const EllipsoidParams& params, double t,
                                                  double c);

InertiaCoefficients stochastic_inertia_coeffs(const DeformationLaw& law,
                                              const EllipsoidParams& params, double t,
                                              double c);

SystemIncrement stochastic_system_increment(const SystemState& state,
                                            const DeformationLaw& law,
                                            const EllipsoidParams& params);

/// Same system with g forced to zero.
SystemIncrement deterministic_system_increment(const SystemState& state,
                                               const DeformationLaw& law,
                                               const EllipsoidParams& params);

FlatteningIncrements flattening_increments(const SystemState& state,
                                           const DeformationLaw& law,
                                           const EllipsoidParams& params);

}  // namespace stochrot

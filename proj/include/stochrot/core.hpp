#pragma once

// Geometry and inertia of a homogeneous ellipsoid of revolution whose volume
// and mass are conserved while its polar semi-axis c changes.
//
// Everything is expressed through c and a² (the equatorial semi-axis
// squared); a itself is only needed for the geometric flattening.

#include <array>
#include <numbers>

namespace stochrot {

inline constexpr double kPi = std::numbers::pi;

/// One day of rotation when the spin rate is 1 rad per time unit.
inline constexpr double kDay = 2.0 * kPi;

/// Mass, volume and deformation window of the ellipsoid.
///
/// The volume is never given independently: it follows from the initial
/// axes through V = 4/3 pi a0^2 c0, so use from_axes() to build one.
struct EllipsoidParams {
  double mass = 1.0;
  double volume = 0.0;
  double c0 = 1.0;
  double d_min = -0.1;
  double d_max = 0.1;

  static EllipsoidParams from_axes(double a0, double c0, double mass, double d_min,
                                   double d_max);

  double lower() const { return c0 + d_min; }
  double upper() const { return c0 + d_max; }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct EllipsoidState {
  double t = 0.0;
  double c = 0.0;
  double a_sq = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
  std::array<double, 3> angular_momentum{};
  std::array<double, 3> omega{};
};

/// J2 uses the sign convention (I1 - I3) / (M a^2), negative for an oblate
/// body. j2_geophysical() flips it to the usual positive value.
struct FlatteningObservables {
  double f_geo = 0.0;
  double dynamical = 0.0;  // H
  double j2 = 0.0;

  double j2_geophysical() const { return -j2; }
};

struct Inertia {
  double i1 = 0.0;  // I1 == I2
  double i3 = 0.0;
};

/// a^2 = 3 V / (4 pi c). Throws std::domain_error for non-positive inputs.
double a_squared_from_c(double c, double volume);

/// V = 4/3 pi a^2 c.
double ellipsoid_volume(double a_sq, double c);

/// I1 = M (a^2 + c^2) / 5, I3 = 2 M a^2 / 5.
Inertia inertia_from_axes(double a_sq, double c, double mass);

/// Observables from the inertia carried by the state (which may have been
/// integrated independently of c) and a^2 from the state.
FlatteningObservables observables(const EllipsoidState& state,
                                  const EllipsoidParams& params);

/// Closed forms valid under mass and volume conservation.
double dynamical_flattening_closed_form(double c, double volume);
double j2_closed_form(double c, double volume);

/// State of a body with the given c, inertia recomputed from the axes and
/// angular momentum I * omega.
EllipsoidState state_from_c(double t, double c, const std::array<double, 3>& omega,
                            const EllipsoidParams& params);

}  // namespace stochrot

#include "stochrot/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stochrot {

EllipsoidParams EllipsoidParams::from_axes(double a0, double c0, double mass,
                                           double d_min, double d_max) {
  if (!(a0 > 0.0)) throw std::invalid_argument("a0 must be positive");
  EllipsoidParams p;
  p.mass = mass;
  p.c0 = c0;
  p.d_min = d_min;
  p.d_max = d_max;
  p.volume = ellipsoid_volume(a0 * a0, c0);
  p.validate();
  return p;
}

void EllipsoidParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  if (!(volume > 0.0)) throw std::invalid_argument("volume must be positive");
  if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
  if (!(d_min < 0.0)) throw std::invalid_argument("d_min must be negative");
  if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive");
  if (!(c0 + d_min > 0.0)) throw std::invalid_argument("c0 + d_min must be positive");
  if (!std::isfinite(volume) || !std::isfinite(c0) || !std::isfinite(d_max) ||
      !std::isfinite(d_min) || !std::isfinite(mass))
    throw std::invalid_argument("ellipsoid parameters must be finite");
}

double a_squared_from_c(double c, double volume) {
  if (!(c > 0.0)) throw std::domain_error("a_squared_from_c: c must be positive");
  if (!(volume > 0.0)) throw std::domain_error("a_squared_from_c: volume must be positive");
  return 3.0 * volume / (4.0 * kPi * c);
}

double ellipsoid_volume(double a_sq, double c) { return 4.0 / 3.0 * kPi * a_sq * c; }

Inertia inertia_from_axes(double a_sq, double c, double mass) {
  if (!(a_sq > 0.0) || !(c > 0.0) || !(mass > 0.0))
    throw std::domain_error("inertia_from_axes: inputs must be positive");
  return {mass / 5.0 * (a_sq + c * c), 2.0 * mass / 5.0 * a_sq};
}

FlatteningObservables observables(const EllipsoidState& state,
                                  const EllipsoidParams& params) {
  FlatteningObservables out;
  const double a = std::sqrt(state.a_sq);
  out.f_geo = (a - state.c) / a;
  // Both ratios share the same rounded numerator so J2 = -2/5 H survives
  // even where H crosses zero.
  const double diff = state.i1 - state.i3;
  out.dynamical = -diff / state.i3;
  out.j2 = diff / (params.mass * state.a_sq);
  return out;
}

double dynamical_flattening_closed_form(double c, double volume) {
  return 0.5 - 2.0 * kPi / (3.0 * volume) * c * c * c;
}

double j2_closed_form(double c, double volume) {
  return -0.2 + 4.0 * kPi / (15.0 * volume) * c * c * c;
}

EllipsoidState state_from_c(double t, double c, const std::array<double, 3>& omega,
                            const EllipsoidParams& params) {
  EllipsoidState s;
  s.t = t;
  s.c = c;
  s.a_sq = a_squared_from_c(c, params.volume);
  const Inertia in = inertia_from_axes(s.a_sq, c, params.mass);
  s.i1 = in.i1;
  s.i2 = in.i1;
  s.i3 = in.i3;
  s.omega = omega;
  s.angular_momentum = {s.i1 * omega[0], s.i2 * omega[1], s.i3 * omega[2]};
  return s;
}

}  // namespace stochrot

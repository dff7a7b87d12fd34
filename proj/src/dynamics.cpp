#include "stochrot/dynamics.hpp"

#include <stdexcept>

namespace stochrot {

void SystemState::validate() const {
  for (double i : inertia)
    if (!(i > 0.0)) throw std::domain_error("inertia component is not positive");
  if (!(c > 0.0)) throw std::domain_error("polar semi-axis is not positive");
}

std::array<double, 3> torque_terms(const std::array<double, 3>& inertia,
                                   const std::array<double, 3>& omega) {
  const auto tq = formulas::torque(inertia[0], inertia[2], omega[0], omega[1], omega[2]);
  return {tq.l1, tq.l2, 0.0};
}

std::array<double, 3> deterministic_inertia_rates(const DeformationLaw& law,
                                                  const EllipsoidParams& params, double t,
                                                  double c) {
  const auto r = formulas::inertia_rates(c, law.drift(t, c), PhysConsts::from(params));
  return {r.k1, r.k1, r.k3};
}

InertiaCoefficients stochastic_inertia_coeffs(const DeformationLaw& law,
                                              const EllipsoidParams& params, double t,
                                              double c) {
  const auto r = formulas::inertia_coeffs(c, law.drift(t, c), law.diffusion(t, c),
                                          PhysConsts::from(params));
  return {{r.h1, r.h1, r.h3}, {r.m1, r.m1, r.m3}};
}

namespace {

SystemIncrement assemble(const SystemState& s, double f, double g, const PhysConsts& k) {
  s.validate();
  const auto ic = formulas::inertia_coeffs(s.c, f, g, k);
  const auto tq = formulas::torque(s.inertia[0], s.inertia[2], s.omega[0], s.omega[1], s.omega[2]);
  const auto w1 = formulas::omega_component(tq.l1, s.inertia[0], s.omega[0], ic.h1, ic.m1);
  const auto w2 = formulas::omega_component(tq.l2, s.inertia[1], s.omega[1], ic.h1, ic.m1);
  const auto w3 = formulas::omega_component(0.0, s.inertia[2], s.omega[2], ic.h3, ic.m3);
  SystemIncrement inc;
  inc.drift = {w1.drift, w2.drift, w3.drift, ic.h1, ic.h1, ic.h3, f};
  inc.diffusion = {w1.diffusion, w2.diffusion, w3.diffusion, ic.m1, ic.m1, ic.m3, g};
  return inc;
}

}  // namespace

SystemIncrement stochastic_system_increment(const SystemState& state,
                                            const DeformationLaw& law,
                                            const EllipsoidParams& params) {
  return assemble(state, law.drift(state.t, state.c), law.diffusion(state.t, state.c),
                  PhysConsts::from(params));
}

SystemIncrement deterministic_system_increment(const SystemState& state,
                                               const DeformationLaw& law,
                                               const EllipsoidParams& params) {
  return assemble(state, law.drift(state.t, state.c), 0.0, PhysConsts::from(params));
}

FlatteningIncrements flattening_increments(const SystemState& state,
                                           const DeformationLaw& law,
                                           const EllipsoidParams& params) {
  const double f = law.drift(state.t, state.c);
  const double g = law.diffusion(state.t, state.c);
  const auto r = formulas::flattening_rates(state.c, f, g, PhysConsts::from(params));
  return {r.h_drift, r.h_diffusion, r.j2_drift, r.j2_diffusion, r.h_ito, r.j2_ito};
}

}  // namespace stochrot

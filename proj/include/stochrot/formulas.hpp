#pragma once

// Coefficient formulas of the Euler-Liouville system with a deforming polar
// axis, written once for any arithmetic type V (double, or one of the SIMD
// lane types under simd/). The scalar reference path and every vector
// kernel instantiate these same templates, which is what makes them
// bitwise-equivalent: the operation order is fixed here and nowhere else.
//
// V needs +, -, *, / and unary minus, construction from double, and the
// helpers vabs / vge / vle / vand / vselect found by ADL (or in
// stochrot::simd for double).

#include "stochrot/core.hpp"

namespace stochrot {

/// Constants folded out of (M, V) once per run.
struct PhysConsts {
  double mass = 1.0;
  double mass_fifth = 0.2;  // M / 5
  double kv = 0.0;          // 3 V / (4 pi), so a^2 = kv / c
  double k3 = 0.0;          // 3 M V / (10 pi)
  double kappa_h = 0.0;     // 2 pi / V
  double kappa_j = 0.0;     // 4 pi / (5 V)

  static PhysConsts from(const EllipsoidParams& p) {
    PhysConsts k;
    k.mass = p.mass;
    k.mass_fifth = p.mass / 5.0;
    k.kv = 3.0 * p.volume / (4.0 * kPi);
    k.k3 = 3.0 * p.mass * p.volume / (10.0 * kPi);
    k.kappa_h = 2.0 * kPi / p.volume;
    k.kappa_j = 4.0 * kPi / (5.0 * p.volume);
    return k;
  }
};

namespace simd {
inline double vabs(double x) { return x < 0.0 ? -x : x; }
inline bool vge(double a, double b) { return a >= b; }
inline bool vle(double a, double b) { return a <= b; }
inline bool vand(bool a, bool b) { return a && b; }
inline double vselect(bool m, double a, double b) { return m ? a : b; }
}  // namespace simd

namespace formulas {

using simd::vabs;
using simd::vand;
using simd::vge;
using simd::vle;
using simd::vselect;

/// coef * (x - lo) * (hi - x); exactly zero when x equals either bound.
template <class V>
inline V boundary_poly(V coef, V x, V lo, V hi) {
  return coef * (x - lo) * (hi - x);
}

/// Deterministic inertia rates; the second component equals the first.
template <class V>
struct InertiaRates {
  V k1, k3;
};

template <class V>
inline InertiaRates<V> inertia_rates(V c, V f, const PhysConsts& k) {
  const V c2 = c * c;
  const V f_term = -(V(k.kv) * f / c2);
  InertiaRates<V> r;
  r.k1 = V(k.mass_fifth) * (f_term + V(2.0) * c * f);
  // 0 - x rather than -x: at f = 0 this gives +0, as inertia_coeffs does.
  r.k3 = V(k.k3) * (V(0.0) - f / c2);
  return r;
}

/// Ito drift (h) and diffusion (m) of I1 and I3; I2 shares I1's.
template <class V>
struct InertiaCoeffs {
  V h1, h3, m1, m3;
};

template <class V>
inline InertiaCoeffs<V> inertia_coeffs(V c, V f, V g, const PhysConsts& k) {
  const V c2 = c * c;
  const V c3 = c2 * c;
  const V g2 = g * g;
  const V f_term = -(V(k.kv) * f / c2);
  InertiaCoeffs<V> r;
  r.h1 = V(k.mass_fifth) * (f_term + g2 * (V(1.0) + V(k.kv) / c3) + V(2.0) * c * f);
  r.h3 = V(k.k3) * (-(f / c2) + g2 / c3);
  r.m1 = V(k.mass_fifth) * g * (V(2.0) * c - V(k.kv) / c2);
  r.m3 = -(V(k.k3) * g / c2);
  return r;
}

/// l_i = (L x Omega)_i in the principal frame; l3 is identically zero.
template <class V>
struct Torque {
  V l1, l2;
};

template <class V>
inline Torque<V> torque(V i1, V i3, V o1, V o2, V o3) {
  const V d = i1 - i3;
  return {d * o2 * o3, -(d * o1 * o3)};
}

/// Drift and diffusion of one rotation component under the Ito quotient
/// rule applied to Omega_i = L_i / I_i.
template <class V>
struct Pair {
  V drift, diffusion;
};

template <class V>
inline Pair<V> omega_component(V l, V inertia, V omega, V h, V m) {
  const V ratio = omega / inertia;
  const V drift = l / inertia - ratio * h + omega / (inertia * inertia) * m * m;
  return {drift, -(ratio * m)};
}

/// Increments of H and J2 in closed form, with the pure Ito part split out.
template <class V>
struct FlatteningRates {
  V h_drift, h_diffusion, h_ito;
  V j2_drift, j2_diffusion, j2_ito, j2_c2f;
};

template <class V>
inline FlatteningRates<V> flattening_rates(V c, V f, V g, const PhysConsts& k) {
  const V c2 = c * c;
  const V c2f = c2 * f;
  const V cg2 = c * (g * g);
  const V kh(k.kappa_h);
  const V kj(k.kappa_j);
  FlatteningRates<V> r;
  r.h_drift = -(kh * (c2f + cg2));
  r.h_diffusion = -(kh * c2 * g);
  r.h_ito = -(kh * cg2);
  r.j2_drift = kj * (c2f + cg2);
  r.j2_diffusion = kj * c2 * g;
  r.j2_ito = kj * cg2;
  r.j2_c2f = kj * c2f;
  return r;
}

/// Integrated quantities of one path. I2 is carried explicitly and, because
/// it shares I1's coefficients, stays bitwise equal to it.
template <class V>
struct LaneState {
  V omega[3];
  V inertia[3];
  V c;
  V h_int;     // H integrated through its own increments
  V j2_int;    // J2 integrated through its own increments
  V acc_c2dc;  // kappa_j * sum c^2 (c_{n+1} - c_n)
  V acc_drift; // kappa_j * sum c^2 f h
  V acc_ito;   // kappa_j * sum c g^2 h
  V acc_mart;  // kappa_j * sum c^2 g dB
};

/// One Euler-Maruyama step of the full system with a single shared Brownian
/// increment. f and g are the deformation law evaluated at (t_n, c_n).
template <class V>
inline LaneState<V> em_advance(const LaneState<V>& s, V f, V g, V h, V db,
                               const PhysConsts& k) {
  const InertiaCoeffs<V> ic = inertia_coeffs(s.c, f, g, k);
  const Torque<V> tq = torque(s.inertia[0], s.inertia[2], s.omega[0], s.omega[1], s.omega[2]);
  const Pair<V> w1 = omega_component(tq.l1, s.inertia[0], s.omega[0], ic.h1, ic.m1);
  const Pair<V> w2 = omega_component(tq.l2, s.inertia[1], s.omega[1], ic.h1, ic.m1);
  const Pair<V> w3 = omega_component(V(0.0), s.inertia[2], s.omega[2], ic.h3, ic.m3);
  const FlatteningRates<V> fr = flattening_rates(s.c, f, g, k);

  LaneState<V> n;
  n.omega[0] = s.omega[0] + w1.drift * h + w1.diffusion * db;
  n.omega[1] = s.omega[1] + w2.drift * h + w2.diffusion * db;
  n.omega[2] = s.omega[2] + w3.drift * h + w3.diffusion * db;
  n.inertia[0] = s.inertia[0] + ic.h1 * h + ic.m1 * db;
  n.inertia[1] = s.inertia[1] + ic.h1 * h + ic.m1 * db;
  n.inertia[2] = s.inertia[2] + ic.h3 * h + ic.m3 * db;
  n.c = s.c + f * h + g * db;
  n.h_int = s.h_int + fr.h_drift * h + fr.h_diffusion * db;
  n.j2_int = s.j2_int + fr.j2_drift * h + fr.j2_diffusion * db;
  n.acc_c2dc = s.acc_c2dc + V(k.kappa_j) * (s.c * s.c) * (n.c - s.c);
  n.acc_drift = s.acc_drift + fr.j2_c2f * h;
  n.acc_ito = s.acc_ito + fr.j2_ito * h;
  n.acc_mart = s.acc_mart + fr.j2_diffusion * db;
  return n;
}

/// Worst-case displacement of c over one step: |f| h + |g| max|dB|.
template <class V>
inline V worst_case_move(V f, V g, V h, V max_increment) {
  return vabs(f) * h + vabs(g) * max_increment;
}

/// True where a step of the given worst-case size cannot leave [lo, hi].
template <class V>
inline auto step_is_safe(V c, V bound, V lo, V hi) {
  return vand(vge(c - bound, lo), vle(c + bound, hi));
}

template <class V>
inline auto inside(V c, V lo, V hi) {
  return vand(vge(c, lo), vle(c, hi));
}

}  // namespace formulas
}  // namespace stochrot

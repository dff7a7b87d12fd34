#pragma once

// Body of the batched toy-law step, instantiated once per lane type. Only
// kernel translation units include this header.
//
// A lane type V provides a lane_width_v specialisation, vload / vstore, a
// mask type with vmask_bits, and the arithmetic listed in formulas.hpp.

#include <cstddef>
#include <cstdint>

#include "stochrot/formulas.hpp"
#include "stochrot/simd/lanes.hpp"
#include "stochrot/simd/scalar.hpp"

namespace stochrot::simd {

template <class V>
inline formulas::LaneState<V> load_state(const LaneArrays& a, std::size_t i) {
  formulas::LaneState<V> s;
  s.omega[0] = vload<V>(a.field[kOmega1] + i);
  s.omega[1] = vload<V>(a.field[kOmega2] + i);
  s.omega[2] = vload<V>(a.field[kOmega3] + i);
  s.inertia[0] = vload<V>(a.field[kI1] + i);
  s.inertia[1] = vload<V>(a.field[kI2] + i);
  s.inertia[2] = vload<V>(a.field[kI3] + i);
  s.c = vload<V>(a.field[kC] + i);
  s.h_int = vload<V>(a.field[kHInt] + i);
  s.j2_int = vload<V>(a.field[kJ2Int] + i);
  s.acc_c2dc = vload<V>(a.field[kAccC2dc] + i);
  s.acc_drift = vload<V>(a.field[kAccDrift] + i);
  s.acc_ito = vload<V>(a.field[kAccIto] + i);
  s.acc_mart = vload<V>(a.field[kAccMart] + i);
  return s;
}

template <class V, class M>
inline void store_selected(const LaneArrays& a, std::size_t i, M keep_new,
                           const formulas::LaneState<V>& n, const formulas::LaneState<V>& o) {
  vstore(a.field[kOmega1] + i, vselect(keep_new, n.omega[0], o.omega[0]));
  vstore(a.field[kOmega2] + i, vselect(keep_new, n.omega[1], o.omega[1]));
  vstore(a.field[kOmega3] + i, vselect(keep_new, n.omega[2], o.omega[2]));
  vstore(a.field[kI1] + i, vselect(keep_new, n.inertia[0], o.inertia[0]));
  vstore(a.field[kI2] + i, vselect(keep_new, n.inertia[1], o.inertia[1]));
  vstore(a.field[kI3] + i, vselect(keep_new, n.inertia[2], o.inertia[2]));
  vstore(a.field[kC] + i, vselect(keep_new, n.c, o.c));
  vstore(a.field[kHInt] + i, vselect(keep_new, n.h_int, o.h_int));
  vstore(a.field[kJ2Int] + i, vselect(keep_new, n.j2_int, o.j2_int));
  vstore(a.field[kAccC2dc] + i, vselect(keep_new, n.acc_c2dc, o.acc_c2dc));
  vstore(a.field[kAccDrift] + i, vselect(keep_new, n.acc_drift, o.acc_drift));
  vstore(a.field[kAccIto] + i, vselect(keep_new, n.acc_ito, o.acc_ito));
  vstore(a.field[kAccMart] + i, vselect(keep_new, n.acc_mart, o.acc_mart));
}

template <class V>
std::size_t toy_step(const LaneArrays& a, const double* db, const ToyStepInputs& in,
                     std::uint8_t* rejected) {
  using formulas::boundary_poly;
  constexpr std::size_t W = lane_width_v<V>;
  const V lo(in.lower), hi(in.upper), h(in.h), max_inc(in.max_increment);
  const V alpha_cos(in.alpha_cos), beta(in.beta);
  std::size_t n_rejected = 0;
  for (std::size_t i = 0; i < a.count; i += W) {
    const formulas::LaneState<V> s = load_state<V>(a, i);
    const V f = boundary_poly(alpha_cos, s.c, lo, hi);
    const V g = boundary_poly(beta, s.c, lo, hi);
    const V bound = formulas::worst_case_move(f, g, h, max_inc);
    const formulas::LaneState<V> n =
        formulas::em_advance(s, f, g, h, vload<V>(db + i), in.consts);
    const auto ok = vand(formulas::step_is_safe(s.c, bound, lo, hi),
                         formulas::inside(n.c, lo, hi));
    store_selected(a, i, ok, n, s);
    const unsigned bits = vmask_bits(ok);
    for (std::size_t l = 0; l < W; ++l) {
      const bool lane_ok = (bits >> l) & 1u;
      rejected[i + l] = lane_ok ? 0 : 1;
      n_rejected += lane_ok ? 0 : 1;
    }
  }
  return n_rejected;
}

}  // namespace stochrot::simd

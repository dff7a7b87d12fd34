#pragma once

// Two double lanes on AArch64 NEON.

#include <arm_neon.h>

#include <cstddef>

#include "stochrot/simd/scalar.hpp"

namespace stochrot::simd::neon {

struct Vec2d {
  static constexpr std::size_t width = 2;
  float64x2_t v;

  Vec2d() = default;
  explicit Vec2d(double x) : v(vdupq_n_f64(x)) {}
  explicit Vec2d(float64x2_t x) : v(x) {}
};

struct Mask2d {
  uint64x2_t m;
};

inline Vec2d operator+(Vec2d a, Vec2d b) { return Vec2d(vaddq_f64(a.v, b.v)); }
inline Vec2d operator-(Vec2d a, Vec2d b) { return Vec2d(vsubq_f64(a.v, b.v)); }
inline Vec2d operator*(Vec2d a, Vec2d b) { return Vec2d(vmulq_f64(a.v, b.v)); }
inline Vec2d operator/(Vec2d a, Vec2d b) { return Vec2d(vdivq_f64(a.v, b.v)); }
inline Vec2d operator-(Vec2d a) { return Vec2d(vnegq_f64(a.v)); }

inline Vec2d vabs(Vec2d a) { return Vec2d(vabsq_f64(a.v)); }
inline Mask2d vge(Vec2d a, Vec2d b) { return {vcgeq_f64(a.v, b.v)}; }
inline Mask2d vle(Vec2d a, Vec2d b) { return {vcleq_f64(a.v, b.v)}; }
inline Mask2d vand(Mask2d a, Mask2d b) { return {vandq_u64(a.m, b.m)}; }
inline Vec2d vselect(Mask2d m, Vec2d a, Vec2d b) { return Vec2d(vbslq_f64(m.m, a.v, b.v)); }
inline unsigned vmask_bits(Mask2d m) {
  return static_cast<unsigned>(vgetq_lane_u64(m.m, 0) & 1u) |
         static_cast<unsigned>((vgetq_lane_u64(m.m, 1) & 1u) << 1);
}
inline void vstore(double* p, Vec2d a) { vst1q_f64(p, a.v); }

}  // namespace stochrot::simd::neon

namespace stochrot::simd {
template <>
inline neon::Vec2d vload<neon::Vec2d>(const double* p) {
  return neon::Vec2d(vld1q_f64(p));
}
}  // namespace stochrot::simd

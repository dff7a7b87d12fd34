#pragma once

// Four double lanes on AVX2. Only include from translation units compiled
// with AVX2 enabled; every operation maps to one correctly rounded
// instruction so results match the scalar lane bit for bit.

#include <immintrin.h>

#include <cstddef>

#include "stochrot/simd/scalar.hpp"

namespace stochrot::simd::avx2 {

struct Vec4d {
  static constexpr std::size_t width = 4;
  __m256d v;

  Vec4d() = default;
  explicit Vec4d(double x) : v(_mm256_set1_pd(x)) {}
  explicit Vec4d(__m256d x) : v(x) {}
};

struct Mask4d {
  __m256d m;
};

inline Vec4d operator+(Vec4d a, Vec4d b) { return Vec4d(_mm256_add_pd(a.v, b.v)); }
inline Vec4d operator-(Vec4d a, Vec4d b) { return Vec4d(_mm256_sub_pd(a.v, b.v)); }
inline Vec4d operator*(Vec4d a, Vec4d b) { return Vec4d(_mm256_mul_pd(a.v, b.v)); }
inline Vec4d operator/(Vec4d a, Vec4d b) { return Vec4d(_mm256_div_pd(a.v, b.v)); }
inline Vec4d operator-(Vec4d a) { return Vec4d(_mm256_xor_pd(a.v, _mm256_set1_pd(-0.0))); }

inline Vec4d vabs(Vec4d a) { return Vec4d(_mm256_andnot_pd(_mm256_set1_pd(-0.0), a.v)); }
inline Mask4d vge(Vec4d a, Vec4d b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GE_OQ)}; }
inline Mask4d vle(Vec4d a, Vec4d b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LE_OQ)}; }
inline Mask4d vand(Mask4d a, Mask4d b) { return {_mm256_and_pd(a.m, b.m)}; }
inline Vec4d vselect(Mask4d m, Vec4d a, Vec4d b) { return Vec4d(_mm256_blendv_pd(b.v, a.v, m.m)); }
inline unsigned vmask_bits(Mask4d m) { return static_cast<unsigned>(_mm256_movemask_pd(m.m)); }
inline void vstore(double* p, Vec4d a) { _mm256_storeu_pd(p, a.v); }

}  // namespace stochrot::simd::avx2

namespace stochrot::simd {
template <>
inline avx2::Vec4d vload<avx2::Vec4d>(const double* p) {
  return avx2::Vec4d(_mm256_loadu_pd(p));
}
}  // namespace stochrot::simd

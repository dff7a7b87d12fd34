#pragma once

// The one-lane "vector": plain double, bool masks.

#include <cstddef>

#include "stochrot/formulas.hpp"

namespace stochrot::simd {

template <class V>
inline constexpr std::size_t lane_width_v = V::width;
template <>
inline constexpr std::size_t lane_width_v<double> = 1;

template <class V>
V vload(const double* p);

template <>
inline double vload<double>(const double* p) {
  return *p;
}

inline void vstore(double* p, double v) { *p = v; }
inline unsigned vmask_bits(bool m) { return m ? 1u : 0u; }

}  // namespace stochrot::simd

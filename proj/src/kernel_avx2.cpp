// Compiled with -mavx2 (no FMA). Keep this TU free of anything but the
// kernel instantiation: inline functions emitted here would carry AVX2
// encodings.

#include "stochrot/simd/avx2.hpp"
#include "stochrot/simd/dispatch.hpp"
#include "stochrot/simd/toy_kernel.hpp"

namespace stochrot::simd {

std::size_t toy_step_avx2(const LaneArrays& a, const double* db, const ToyStepInputs& in,
                          std::uint8_t* rejected) {
  return toy_step<avx2::Vec4d>(a, db, in, rejected);
}

}  // namespace stochrot::simd

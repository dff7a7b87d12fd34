#include "stochrot/simd/dispatch.hpp"
#include "stochrot/simd/neon.hpp"
#include "stochrot/simd/toy_kernel.hpp"

namespace stochrot::simd {

std::size_t toy_step_neon(const LaneArrays& a, const double* db, const ToyStepInputs& in,
                          std::uint8_t* rejected) {
  return toy_step<neon::Vec2d>(a, db, in, rejected);
}

}  // namespace stochrot::simd

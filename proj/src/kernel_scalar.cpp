#include "stochrot/simd/dispatch.hpp"
#include "stochrot/simd/toy_kernel.hpp"

namespace stochrot::simd {

std::size_t toy_step_scalar(const LaneArrays& a, const double* db, const ToyStepInputs& in,
                            std::uint8_t* rejected) {
  return toy_step<double>(a, db, in, rejected);
}

}  // namespace stochrot::simd

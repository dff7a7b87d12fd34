#pragma once

// Runtime selection of the toy-law step kernel.

#include <optional>
#include <string>
#include <vector>

#include "stochrot/simd/lanes.hpp"

namespace stochrot::simd {

enum class Backend { scalar, avx2, neon };

const char* to_string(Backend b);
/// Accepts "scalar", "avx2", "neon"; "auto" is resolved by the caller.
std::optional<Backend> parse_backend(const std::string& s);

/// Compiled in and supported by the running CPU.
bool backend_available(Backend b);
std::vector<Backend> available_backends();
/// Widest available backend.
Backend best_backend();

std::size_t lane_width(Backend b);

/// Throws std::runtime_error when the backend is unavailable.
ToyStepKernel toy_step_kernel(Backend b);

// Individual kernels, exposed for the equivalence tests.
std::size_t toy_step_scalar(const LaneArrays&, const double*, const ToyStepInputs&,
                            std::uint8_t*);
std::size_t toy_step_avx2(const LaneArrays&, const double*, const ToyStepInputs&,
                          std::uint8_t*);
std::size_t toy_step_neon(const LaneArrays&, const double*, const ToyStepInputs&,
                          std::uint8_t*);

}  // namespace stochrot::simd

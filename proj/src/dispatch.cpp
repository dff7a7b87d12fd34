#include "stochrot/simd/dispatch.hpp"

#include <stdexcept>

namespace stochrot::simd {

const char* to_string(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

std::optional<Backend> parse_backend(const std::string& s) {
  for (auto b : {Backend::scalar, Backend::avx2, Backend::neon})
    if (s == to_string(b)) return b;
  return std::nullopt;
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(STOCHROT_AVX2_KERNEL)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(STOCHROT_NEON_KERNEL)
      return true;  // baseline on AArch64
#else
      return false;
#endif
  }
  return false;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (auto b : {Backend::scalar, Backend::avx2, Backend::neon})
    if (backend_available(b)) out.push_back(b);
  return out;
}

Backend best_backend() {
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

std::size_t lane_width(Backend b) {
  switch (b) {
    case Backend::scalar: return 1;
    case Backend::avx2: return 4;
    case Backend::neon: return 2;
  }
  return 1;
}

ToyStepKernel toy_step_kernel(Backend b) {
  if (!backend_available(b))
    throw std::runtime_error(std::string("SIMD backend not available: ") + to_string(b));
  switch (b) {
    case Backend::scalar:
      return &toy_step_scalar;
#if defined(STOCHROT_AVX2_KERNEL)
    case Backend::avx2:
      return &toy_step_avx2;
#endif
#if defined(STOCHROT_NEON_KERNEL)
    case Backend::neon:
      return &toy_step_neon;
#endif
    default:
      break;
  }
  throw std::runtime_error("unreachable backend");
}

}  // namespace stochrot::simd

#include "stochrot/brownian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stochrot/core.hpp"

namespace stochrot {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr std::uint32_t kTagRetry = 1u << 30;
constexpr std::uint32_t kTagSubstep = 2u << 30;
constexpr unsigned kMaxDepth = 31;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<double, 2> box_muller(const PhiloxCounter& x) {
  const double u1 = uniform_open(x[0], x[1]);
  const double u2 = uniform_open(x[2], x[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * kPi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

double truncated_normal_variance(double k) {
  if (std::isinf(k)) return 1.0;
  const double pdf = std::exp(-0.5 * k * k) / std::sqrt(2.0 * kPi);
  const double mass = std::erf(k / std::sqrt(2.0));
  return 1.0 - 2.0 * k * pdf / mass;
}

BrownianPath::BrownianPath(std::uint64_t seed, std::uint64_t path_index, double fine_step,
                           double truncation_k, std::uint32_t refine)
    : seed_(seed),
      path_(path_index),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      fine_step_(fine_step),
      sqrt_fine_(std::sqrt(fine_step)),
      step_(fine_step * refine),
      k_(truncation_k),
      refine_(refine) {
  if (!(fine_step > 0.0)) throw std::invalid_argument("Brownian step must be positive");
  if (!(truncation_k > 0.0)) throw std::invalid_argument("truncation_k must be positive");
  if (refine == 0) throw std::invalid_argument("refine must be at least 1");
  if (path_index > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("path index must fit in 32 bits");
  max_increment_ = static_cast<double>(refine_) * k_ * sqrt_fine_;
}

PhiloxCounter BrownianPath::counter(std::uint64_t word01, std::uint32_t tag) const {
  return {static_cast<std::uint32_t>(word01), static_cast<std::uint32_t>(word01 >> 32),
          static_cast<std::uint32_t>(path_), tag};
}

double BrownianPath::standard_normal(std::uint64_t fine_index) const {
  const std::uint64_t block = fine_index >> 1;
  if (block != cached_block_) {
    cached_pair_ = box_muller(philox4x32_10(counter(block, 0), key_));
    cached_block_ = block;
  }
  double z = cached_pair_[fine_index & 1];
  for (std::uint32_t attempt = 1; !(std::fabs(z) <= k_); ++attempt) {
    if (attempt >= kTagRetry) throw std::runtime_error("truncated normal: retries exhausted");
    z = box_muller(philox4x32_10(counter(fine_index, kTagRetry | attempt), key_))[0];
  }
  return z;
}

double BrownianPath::increment(std::uint64_t n) const {
  if (refine_ == 1) return sqrt_fine_ * standard_normal(n);
  double sum = 0.0;
  const std::uint64_t first = n * refine_;
  for (std::uint32_t j = 0; j < refine_; ++j) sum += sqrt_fine_ * standard_normal(first + j);
  return sum;
}

double BrownianPath::substep_increment(std::uint64_t n, unsigned depth,
                                       std::uint32_t index) const {
  if (depth == 0 || depth > kMaxDepth - 11)
    throw std::invalid_argument("substep depth out of range");
  const std::uint32_t base = kTagSubstep | (depth << 25) | ((index & 0xFFFFFu) << 5);
  for (std::uint32_t attempt = 0; attempt < 32; ++attempt) {
    const double z = box_muller(philox4x32_10(counter(n, base | attempt), key_))[0];
    if (std::fabs(z) <= k_) return std::sqrt(step_ / std::ldexp(1.0, static_cast<int>(depth))) * z;
  }
  throw std::runtime_error("truncated normal: substep retries exhausted");
}

double BrownianPath::max_abs_substep(unsigned depth) const {
  return k_ * std::sqrt(step_ / std::ldexp(1.0, static_cast<int>(depth)));
}

}  // namespace stochrot

#pragma once

// Reproducible Brownian increments.
//
// Generator contract: every standard normal is a pure function of
// (seed, path index, step index, tag). Uniforms come from Philox4x32-10
// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3"), keyed by
// the 64-bit seed, with the 128-bit counter laid out as
//
//   word 0, 1 : step index (low, high 32 bits)
//   word 2    : path index (must fit 32 bits)
//   word 3    : tag
//                 0                      primary pair, word 0/1 hold step/2
//                 1<<30 | attempt        redraw after truncation rejection
//                 2<<30 | depth<<25 | index<<5 | attempt
//                                        increment of a bisected sub-step
//
// Each 128-bit block gives two 52-bit uniforms in (0, 1) and, through
// Box-Muller, two normals; primary step n uses element n & 1 of block n / 2.
// Normals with |z| > k are redrawn, so increments are N(0, h) truncated at
// k sqrt(h). Ensembles are therefore independent of execution order.

#include <array>
#include <cstdint>

namespace stochrot {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// (0, 1), never 0 or 1: the top 52 bits of (hi, lo) centred on the grid.
double uniform_open(std::uint32_t hi, std::uint32_t lo);

/// Var(Z | |Z| <= k) for a standard normal Z.
double truncated_normal_variance(double k);

class BrownianPath {
 public:
  /// Base step h = refine * fine_step. Base increment n is the sum of the
  /// fine increments n*refine .. n*refine + refine - 1, so paths at
  /// different refinements share one underlying Brownian motion.
  BrownianPath(std::uint64_t seed, std::uint64_t path_index, double fine_step,
               double truncation_k, std::uint32_t refine = 1);

  double step() const { return step_; }
  double fine_step() const { return fine_step_; }
  std::uint32_t refine() const { return refine_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t path_index() const { return path_; }
  double truncation_k() const { return k_; }

  double increment(std::uint64_t n) const;

  /// Fresh increment of variance step / 2^depth for sub-step `index` of base
  /// step n. Independent of every primary increment.
  double substep_increment(std::uint64_t n, unsigned depth, std::uint32_t index) const;

  double max_abs_increment() const { return max_increment_; }
  double max_abs_substep(unsigned depth) const;

  /// Truncated standard normal number `fine_index` of this path.
  double standard_normal(std::uint64_t fine_index) const;

 private:
  PhiloxCounter counter(std::uint64_t word01, std::uint32_t tag) const;

  std::uint64_t seed_;
  std::uint64_t path_;
  PhiloxKey key_;
  double fine_step_;
  double sqrt_fine_;
  double step_;
  double k_;
  double max_increment_;
  std::uint32_t refine_;

  mutable std::uint64_t cached_block_ = ~std::uint64_t{0};
  mutable std::array<double, 2> cached_pair_{};
};

}  // namespace stochrot

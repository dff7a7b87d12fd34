#pragma once

// Structure-of-arrays storage for many paths advanced in lock step, and the
// signature shared by every toy-law step kernel.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "stochrot/formulas.hpp"

namespace stochrot::simd {

enum Field : std::size_t {
  kOmega1,
  kOmega2,
  kOmega3,
  kI1,
  kI2,
  kI3,
  kC,
  kHInt,
  kJ2Int,
  kAccC2dc,
  kAccDrift,
  kAccIto,
  kAccMart,
  kFieldCount
};

/// Pointers into per-field arrays of `count` lanes; count must be a multiple
/// of the kernel width.
struct LaneArrays {
  std::array<double*, kFieldCount> field{};
  std::size_t count = 0;
};

/// Inputs that are uniform across lanes for one base step.
struct ToyStepInputs {
  double alpha_cos = 0.0;  // alpha * cos(gamma t_n)
  double beta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double h = 0.0;
  double max_increment = 0.0;
  PhysConsts consts{};
};

/// Advances every lane by one Euler-Maruyama step of the toy law. Lanes
/// whose step is not provably safe, or lands outside [lower, upper], are
/// left untouched and flagged in `rejected` (1 per lane); returns how many.
using ToyStepKernel = std::size_t (*)(const LaneArrays& lanes, const double* db,
                                      const ToyStepInputs& in, std::uint8_t* rejected);

/// Owning storage for LaneArrays.
class LaneBuffer {
 public:
  LaneBuffer() = default;
  explicit LaneBuffer(std::size_t count) { resize(count); }

  void resize(std::size_t count) {
    for (auto& v : data_) v.assign(count, 0.0);
    count_ = count;
  }
  std::size_t size() const { return count_; }

  LaneArrays view() {
    LaneArrays a;
    for (std::size_t f = 0; f < kFieldCount; ++f) a.field[f] = data_[f].data();
    a.count = count_;
    return a;
  }

  formulas::LaneState<double> get(std::size_t lane) const {
    formulas::LaneState<double> s;
    s.omega[0] = data_[kOmega1][lane];
    s.omega[1] = data_[kOmega2][lane];
    s.omega[2] = data_[kOmega3][lane];
    s.inertia[0] = data_[kI1][lane];
    s.inertia[1] = data_[kI2][lane];
    s.inertia[2] = data_[kI3][lane];
    s.c = data_[kC][lane];
    s.h_int = data_[kHInt][lane];
    s.j2_int = data_[kJ2Int][lane];
    s.acc_c2dc = data_[kAccC2dc][lane];
    s.acc_drift = data_[kAccDrift][lane];
    s.acc_ito = data_[kAccIto][lane];
    s.acc_mart = data_[kAccMart][lane];
    return s;
  }

  void set(std::size_t lane, const formulas::LaneState<double>& s) {
    data_[kOmega1][lane] = s.omega[0];
    data_[kOmega2][lane] = s.omega[1];
    data_[kOmega3][lane] = s.omega[2];
    data_[kI1][lane] = s.inertia[0];
    data_[kI2][lane] = s.inertia[1];
    data_[kI3][lane] = s.inertia[2];
    data_[kC][lane] = s.c;
    data_[kHInt][lane] = s.h_int;
    data_[kJ2Int][lane] = s.j2_int;
    data_[kAccC2dc][lane] = s.acc_c2dc;
    data_[kAccDrift][lane] = s.acc_drift;
    data_[kAccIto][lane] = s.acc_ito;
    data_[kAccMart][lane] = s.acc_mart;
  }

 private:
  std::array<std::vector<double>, kFieldCount> data_;
  std::size_t count_ = 0;
};

}  // namespace stochrot::simd

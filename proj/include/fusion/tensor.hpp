#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "fusion/error.hpp"

namespace fusion {

using Index = Eigen::Index;

// Every array in the network is an Eigen matrix. Sequences are stored
// length x channels; a conv kernel [out, in, k] is stored out x (in*k) with
// column c*k + j holding tap j of input channel c.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/// Throws NumericError if any coefficient is NaN or infinite.
template <typename Derived>
void check_finite(const Eigen::DenseBase<Derived>& x, const std::string& what) {
  if (!x.derived().allFinite()) {
    throw NumericError("non-finite value in " + what);
  }
}

/// SplitMix64 finalizer; used to derive independent seeds from (seed, tag).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed ^ (tag * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace fusion

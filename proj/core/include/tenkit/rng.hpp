#pragma once

#include <cstdint>
#include <random>

#include "tenkit/matrix.hpp"

namespace tenkit {

/// Seeded uniform-[0,1) source. The engine is std::mt19937_64 (fully
/// specified by the standard) and the mapping to doubles takes the top 53
/// bits, so a given seed yields the same stream on every platform.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

/// Stream-splitting hash so per-mode factor seeds are decorrelated from the
/// run seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// rows x cols matrix of uniform-[0,1) draws filled in storage order.
Matrix uniform_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace tenkit

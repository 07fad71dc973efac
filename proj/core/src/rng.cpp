#include "tenkit/rng.hpp"

namespace tenkit {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  UniformSource src(seed);
  Matrix m(rows, cols);
  double* d = m.data();
  for (std::size_t i = 0; i < rows * cols; ++i) d[i] = src.next();
  return m;
}

}  // namespace tenkit

#include "tenkit/par/process_grid.hpp"

#include <limits>
#include <stdexcept>

namespace tenkit::par {

ProcessGrid::ProcessGrid(std::vector<std::uint64_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("process grid needs at least one mode");
  std::uint64_t p = 1;
  for (std::uint64_t d : dims_) {
    if (d == 0) throw std::invalid_argument("process grid extents must be positive");
    p *= d;
    if (p > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
      throw std::invalid_argument("process grid too large");
  }
  size_ = static_cast<int>(p);
}

std::vector<std::uint64_t> ProcessGrid::coord_of(int rank) const {
  if (rank < 0 || rank >= size_) throw std::out_of_range("rank out of range");
  std::vector<std::uint64_t> c(dims_.size());
  auto r = static_cast<std::uint64_t>(rank);
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    c[n] = r % dims_[n];
    r /= dims_[n];
  }
  return c;
}

int ProcessGrid::rank_of(std::span<const std::uint64_t> coord) const {
  if (coord.size() != dims_.size()) throw std::invalid_argument("coordinate arity mismatch");
  std::uint64_t rank = 0;
  std::uint64_t stride = 1;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (coord[n] >= dims_[n]) throw std::out_of_range("coordinate out of range");
    rank += coord[n] * stride;
    stride *= dims_[n];
  }
  return static_cast<int>(rank);
}

std::vector<int> ProcessGrid::slice_ranks(std::size_t mode1, std::uint64_t value) const {
  if (mode1 < 1 || mode1 > dims_.size()) throw std::invalid_argument("slice mode out of range");
  if (value >= dims_[mode1 - 1]) throw std::out_of_range("slice coordinate out of range");
  std::vector<int> ranks;
  ranks.reserve(size_ / dims_[mode1 - 1]);
  for (int r = 0; r < size_; ++r)
    if (coord_of(r)[mode1 - 1] == value) ranks.push_back(r);
  return ranks;
}

std::vector<int> ProcessGrid::all_ranks() const {
  std::vector<int> ranks(size_);
  for (int r = 0; r < size_; ++r) ranks[r] = r;
  return ranks;
}

}  // namespace tenkit::par

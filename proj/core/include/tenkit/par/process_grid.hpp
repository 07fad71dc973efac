#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tenkit::par {

/// Logical N-dimensional grid of workers with as many modes as the data
/// tensor. Ranks map to coordinates generalized-column-major: coordinate 0
/// varies fastest. Coordinates are 0-based.
class ProcessGrid {
 public:
  explicit ProcessGrid(std::vector<std::uint64_t> dims);

  std::size_t order() const { return dims_.size(); }
  std::span<const std::uint64_t> dims() const { return dims_; }
  std::uint64_t dim(std::size_t mode1) const { return dims_[mode1 - 1]; }
  int size() const { return size_; }

  std::vector<std::uint64_t> coord_of(int rank) const;
  int rank_of(std::span<const std::uint64_t> coord) const;

  /// Ranks whose mode-n coordinate equals `value`, ascending. These are the
  /// P / Pn workers forming one mode-n slice.
  std::vector<int> slice_ranks(std::size_t mode1, std::uint64_t value) const;

  std::vector<int> all_ranks() const;

 private:
  std::vector<std::uint64_t> dims_;
  int size_ = 1;
};

}  // namespace tenkit::par

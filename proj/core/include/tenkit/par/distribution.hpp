#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/par/process_grid.hpp"

namespace tenkit::par {

/// Cartesian block partition of a tensor over a process grid of matching
/// order: worker p owns the hyper-rectangle whose mode-n index range is
/// determined by its coordinate p_n, every local block has extents In/Pn.
/// When an extent is not divisible by the grid, optional zero padding rounds
/// it up to the next multiple; padded slabs are zero and are trimmed again
/// on assembly.
class BlockDistribution {
 public:
  BlockDistribution(std::span<const std::uint64_t> tensor_dims, const ProcessGrid& grid,
                    bool allow_padding = false);

  const ProcessGrid& grid() const { return *grid_; }
  std::span<const std::uint64_t> tensor_dims() const { return dims_; }
  std::span<const std::uint64_t> padded_dims() const { return padded_; }
  bool padded() const;

  /// Local tensor block extent in mode n (identical on every worker).
  std::uint64_t local_extent(std::size_t mode1) const;
  /// Rows of the mode-n factor gathered within one slice: In_padded / Pn.
  std::uint64_t slice_rows(std::size_t mode1) const;
  /// Rows of the mode-n factor owned by one worker. The slice block is split
  /// into contiguous chunks over the P/Pn slice members, as evenly as
  /// possible (leading members absorb the remainder).
  std::uint64_t owned_rows(std::size_t mode1, int rank) const;
  /// Owned row counts for every member of a mode-n slice, in member order.
  std::vector<std::uint64_t> owned_partition(std::size_t mode1) const;
  /// Global row offset of a worker's owned block of the mode-n factor.
  std::uint64_t owned_row_offset(std::size_t mode1, int rank) const;
  /// Position of a rank within its mode-n slice group (ascending rank).
  std::uint64_t slice_position(std::size_t mode1, int rank) const;

  /// Extract worker `rank`'s local block (reads zeros from the padding).
  DenseTensor local_block(const DenseTensor& t, int rank) const;
  std::vector<DenseTensor> scatter(const DenseTensor& t) const;

  /// Reassemble the original tensor from all local blocks; padding trimmed.
  DenseTensor gather(std::span<const DenseTensor> locals) const;

 private:
  const ProcessGrid* grid_;
  std::vector<std::uint64_t> dims_;
  std::vector<std::uint64_t> padded_;
};

}  // namespace tenkit::par

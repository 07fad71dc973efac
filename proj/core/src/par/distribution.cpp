#include "tenkit/par/distribution.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tenkit::par {

BlockDistribution::BlockDistribution(std::span<const std::uint64_t> tensor_dims,
                                     const ProcessGrid& grid, bool allow_padding)
    : grid_(&grid), dims_(tensor_dims.begin(), tensor_dims.end()) {
  if (dims_.size() != grid.order())
    throw std::invalid_argument("grid order does not match tensor order");
  padded_.resize(dims_.size());
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    const std::uint64_t p = grid.dims()[n];
    if (dims_[n] % p == 0) {
      padded_[n] = dims_[n];
    } else if (allow_padding) {
      padded_[n] = (dims_[n] / p + 1) * p;
    } else {
      throw std::invalid_argument("mode " + std::to_string(n + 1) + " extent " +
                                  std::to_string(dims_[n]) + " is not divisible by grid extent " +
                                  std::to_string(p) + " (enable padding)");
    }
  }
}

bool BlockDistribution::padded() const { return padded_ != dims_; }

std::uint64_t BlockDistribution::local_extent(std::size_t mode1) const {
  return padded_[mode1 - 1] / grid_->dim(mode1);
}

std::uint64_t BlockDistribution::slice_rows(std::size_t mode1) const {
  return local_extent(mode1);
}

std::vector<std::uint64_t> BlockDistribution::owned_partition(std::size_t mode1) const {
  const std::uint64_t rows = slice_rows(mode1);
  const std::uint64_t members =
      static_cast<std::uint64_t>(grid_->size()) / grid_->dim(mode1);
  const std::uint64_t base = rows / members;
  const std::uint64_t rem = rows % members;
  std::vector<std::uint64_t> part(members, base);
  for (std::uint64_t q = 0; q < rem; ++q) ++part[q];
  return part;
}

std::uint64_t BlockDistribution::owned_rows(std::size_t mode1, int rank) const {
  const std::uint64_t rows = slice_rows(mode1);
  const std::uint64_t members =
      static_cast<std::uint64_t>(grid_->size()) / grid_->dim(mode1);
  const std::uint64_t q = slice_position(mode1, rank);
  return rows / members + (q < rows % members ? 1 : 0);
}

std::uint64_t BlockDistribution::slice_position(std::size_t mode1, int rank) const {
  const auto coord = grid_->coord_of(rank);
  const auto slice = grid_->slice_ranks(mode1, coord[mode1 - 1]);
  for (std::size_t q = 0; q < slice.size(); ++q)
    if (slice[q] == rank) return q;
  throw std::logic_error("rank missing from its own slice");
}

std::uint64_t BlockDistribution::owned_row_offset(std::size_t mode1, int rank) const {
  const auto coord = grid_->coord_of(rank);
  const std::uint64_t q = slice_position(mode1, rank);
  const auto part = owned_partition(mode1);
  std::uint64_t within = 0;
  for (std::uint64_t i = 0; i < q; ++i) within += part[i];
  return coord[mode1 - 1] * slice_rows(mode1) + within;
}

DenseTensor BlockDistribution::local_block(const DenseTensor& t, int rank) const {
  const auto coord = grid_->coord_of(rank);
  const std::size_t order = dims_.size();
  std::vector<std::uint64_t> local_dims(order);
  std::vector<std::uint64_t> offset(order);
  for (std::size_t n = 0; n < order; ++n) {
    local_dims[n] = padded_[n] / grid_->dims()[n];
    offset[n] = coord[n] * local_dims[n];
  }
  DenseTensor block(local_dims);
  std::vector<std::uint64_t> idx(order, 0);
  for (std::uint64_t flat = 0; flat < block.numel(); ++flat) {
    bool inside = true;
    std::uint64_t goff = 0;
    std::uint64_t stride = 1;
    for (std::size_t n = 0; n < order; ++n) {
      const std::uint64_t gi = offset[n] + idx[n];
      if (gi >= dims_[n]) {
        inside = false;
        break;
      }
      goff += gi * stride;
      stride *= dims_[n];
    }
    block[flat] = inside ? t[goff] : 0.0;
    for (std::size_t n = 0; n < order; ++n) {
      if (++idx[n] < local_dims[n]) break;
      idx[n] = 0;
    }
  }
  return block;
}

std::vector<DenseTensor> BlockDistribution::scatter(const DenseTensor& t) const {
  if (!std::equal(dims_.begin(), dims_.end(), t.dims().begin(), t.dims().end()))
    throw std::invalid_argument("scatter: tensor extents do not match the distribution");
  std::vector<DenseTensor> blocks;
  blocks.reserve(grid_->size());
  for (int r = 0; r < grid_->size(); ++r) blocks.push_back(local_block(t, r));
  return blocks;
}

DenseTensor BlockDistribution::gather(std::span<const DenseTensor> locals) const {
  if (locals.size() != static_cast<std::size_t>(grid_->size()))
    throw std::invalid_argument("gather: need one block per worker");
  const std::size_t order = dims_.size();
  DenseTensor out(dims_);
  for (int r = 0; r < grid_->size(); ++r) {
    const auto coord = grid_->coord_of(r);
    const DenseTensor& block = locals[r];
    std::vector<std::uint64_t> local_dims(order);
    std::vector<std::uint64_t> offset(order);
    for (std::size_t n = 0; n < order; ++n) {
      local_dims[n] = padded_[n] / grid_->dims()[n];
      offset[n] = coord[n] * local_dims[n];
      if (block.dims()[n] != local_dims[n])
        throw std::invalid_argument("gather: block extents do not match the distribution");
    }
    std::vector<std::uint64_t> idx(order, 0);
    for (std::uint64_t flat = 0; flat < block.numel(); ++flat) {
      bool inside = true;
      std::uint64_t goff = 0;
      std::uint64_t stride = 1;
      for (std::size_t n = 0; n < order; ++n) {
        const std::uint64_t gi = offset[n] + idx[n];
        if (gi >= dims_[n]) {
          inside = false;
          break;
        }
        goff += gi * stride;
        stride *= dims_[n];
      }
      if (inside) out[goff] = block[flat];
      for (std::size_t n = 0; n < order; ++n) {
        if (++idx[n] < local_dims[n]) break;
        idx[n] = 0;
      }
    }
  }
  return out;
}

}  // namespace tenkit::par

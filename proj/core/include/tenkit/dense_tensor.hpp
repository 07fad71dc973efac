#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tenkit/matrix.hpp"

namespace tenkit {

/// N-way dense tensor of doubles in generalized column-major layout: the
/// logical entry (i1, ..., iN), with 1-based indices, is stored at flat
/// offset sum_n (in - 1) * prod_{m<n} Im. Mode 1 varies fastest.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::uint64_t> dims);
  DenseTensor(std::vector<std::uint64_t> dims, std::vector<double> data);

  std::size_t order() const { return dims_.size(); }
  std::span<const std::uint64_t> dims() const { return dims_; }
  std::uint64_t dim(std::size_t mode1) const;  // 1-based mode
  std::uint64_t numel() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  double operator[](std::uint64_t flat) const { return data_[flat]; }
  double& operator[](std::uint64_t flat) { return data_[flat]; }

  /// Flat offset of a 1-based multi-index. Throws on out-of-range indices.
  std::uint64_t offset_of(std::span<const std::uint64_t> index1) const;

  /// Inverse of offset_of: 1-based multi-index of a flat offset.
  std::vector<std::uint64_t> index_of(std::uint64_t offset) const;

  double at(std::span<const std::uint64_t> index1) const { return data_[offset_of(index1)]; }
  double& at(std::span<const std::uint64_t> index1) { return data_[offset_of(index1)]; }

  /// Sum of squared entries, accumulated in storage order.
  double norm_squared() const;

  friend bool operator==(const DenseTensor& a, const DenseTensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  std::vector<std::uint64_t> dims_;
  std::vector<double> data_;
};

/// Checked product of extents; throws if it overflows or if any extent is 0.
std::uint64_t checked_numel(std::span<const std::uint64_t> dims);

/// Zero-copy matricization of a tensor split after mode s (1 <= s < N):
/// rows enumerate modes 1..s and columns enumerate modes s+1..N, both with
/// the lowest mode fastest. Because the tensor layout is generalized
/// column-major, element (r, c) of the view is simply data[r + rows * c].
class SplitView {
 public:
  SplitView(const DenseTensor& t, std::size_t split);

  std::uint64_t rows() const { return rows_; }
  std::uint64_t cols() const { return cols_; }
  std::size_t split() const { return split_; }
  const double* data() const { return data_; }
  double operator()(std::uint64_t r, std::uint64_t c) const { return data_[r + rows_ * c]; }

 private:
  const double* data_;
  std::uint64_t rows_;
  std::uint64_t cols_;
  std::size_t split_;
};

/// Reference mode-n matricization (1-based n). Materializes an In x (I/In)
/// copy whose column j is the j-th mode-n fiber, remaining modes enumerated
/// in increasing order with the lowest fastest. Test/reference path only.
Matrix mode_n_matricize(const DenseTensor& t, std::size_t mode1);

}  // namespace tenkit

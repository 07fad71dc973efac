#include "tenkit/dense_tensor.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace tenkit {

std::uint64_t checked_numel(std::span<const std::uint64_t> dims) {
  if (dims.empty()) throw std::invalid_argument("tensor needs at least one mode");
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) {
    if (d == 0) throw std::invalid_argument("tensor extents must be positive");
    if (d > std::numeric_limits<std::uint64_t>::max() / n)
      throw std::invalid_argument("tensor extent product overflows");
    n *= d;
  }
  return n;
}

DenseTensor::DenseTensor(std::vector<std::uint64_t> dims) : dims_(std::move(dims)) {
  data_.assign(checked_numel(dims_), 0.0);
}

DenseTensor::DenseTensor(std::vector<std::uint64_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_numel(dims_) != data_.size())
    throw std::invalid_argument("tensor data length does not match extents");
}

std::uint64_t DenseTensor::dim(std::size_t mode1) const {
  if (mode1 < 1 || mode1 > dims_.size()) throw std::invalid_argument("mode out of range");
  return dims_[mode1 - 1];
}

std::uint64_t DenseTensor::offset_of(std::span<const std::uint64_t> index1) const {
  if (index1.size() != dims_.size()) throw std::invalid_argument("multi-index arity mismatch");
  std::uint64_t off = 0;
  std::uint64_t stride = 1;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    const std::uint64_t i = index1[n];
    if (i < 1 || i > dims_[n])
      throw std::out_of_range("index " + std::to_string(i) + " out of range for mode " +
                              std::to_string(n + 1));
    off += (i - 1) * stride;
    stride *= dims_[n];
  }
  return off;
}

std::vector<std::uint64_t> DenseTensor::index_of(std::uint64_t offset) const {
  if (offset >= numel()) throw std::out_of_range("flat offset out of range");
  std::vector<std::uint64_t> idx(dims_.size());
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    idx[n] = offset % dims_[n] + 1;
    offset /= dims_[n];
  }
  return idx;
}

double DenseTensor::norm_squared() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

SplitView::SplitView(const DenseTensor& t, std::size_t split) : data_(t.data()), split_(split) {
  if (split < 1 || split >= t.order())
    throw std::invalid_argument("split point must satisfy 1 <= s < N");
  rows_ = 1;
  cols_ = 1;
  for (std::size_t n = 0; n < t.order(); ++n) {
    if (n < split)
      rows_ *= t.dims()[n];
    else
      cols_ *= t.dims()[n];
  }
}

Matrix mode_n_matricize(const DenseTensor& t, std::size_t mode1) {
  const std::size_t n = t.order();
  if (mode1 < 1 || mode1 > n) throw std::invalid_argument("matricization mode out of range");
  const std::uint64_t in = t.dims()[mode1 - 1];
  const std::uint64_t cols = t.numel() / in;
  Matrix m(in, cols);
  // Walk the tensor in storage order; the column index advances with the
  // remaining modes exactly as the flat offset does once mode n is removed.
  std::uint64_t left = 1;
  for (std::size_t k = 0; k + 1 < mode1; ++k) left *= t.dims()[k];
  const std::uint64_t right = t.numel() / (left * in);
  const double* src = t.data();
  std::uint64_t flat = 0;
  for (std::uint64_t r = 0; r < right; ++r)
    for (std::uint64_t i = 0; i < in; ++i)
      for (std::uint64_t l = 0; l < left; ++l) m(i, l + left * r) = src[flat++];
  return m;
}

}  // namespace tenkit

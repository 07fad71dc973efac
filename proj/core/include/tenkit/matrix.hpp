#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tenkit {

/// Dense column-major matrix of doubles. This is the only matrix type in the
/// library; factor matrices, Gram matrices, and MTTKRP results all use it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r + c * rows_]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r + c * rows_]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  /// Column c as a contiguous span.
  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  void fill(double v);
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Kernels below run single-threaded with a fixed summation order (ascending
/// in the contracted index), so results do not depend on blocking choices.
namespace kernels {

/// C = A * B for column-major inputs, with A given as a raw pointer so tensor
/// matricization views can be multiplied without copying.
/// A is m x k with leading dimension lda, B is k x n, C is m x n.
void gemm_nn(const double* a, std::size_t m, std::size_t k, std::size_t lda,
             const Matrix& b, Matrix& c);

/// C = A^T * B. A is k x m (so C is m x n), B is k x n.
void gemm_tn(const double* a, std::size_t k, std::size_t m, std::size_t lda,
             const Matrix& b, Matrix& c);

/// y = A * x for column-major A (m x k) with leading dimension lda.
void gemv_n(const double* a, std::size_t m, std::size_t k, std::size_t lda,
            const double* x, double* y);

/// y = A^T * x for column-major A (k x m) with leading dimension lda.
void gemv_t(const double* a, std::size_t k, std::size_t m, std::size_t lda,
            const double* x, double* y);

}  // namespace kernels

/// H^T * H. The upper triangle is computed and mirrored, so the result is
/// symmetric to the last bit.
Matrix gram(const Matrix& h);

/// Khatri-Rao product of one or more matrices with equal column counts.
///
/// For two inputs A (Ia x R) and B (Ib x R) the result K is Ia*Ib x R with
/// K(i + Ia*j, :) = A(i, :) .* B(j, :), i.e. the first argument's row index
/// varies fastest. Multiple inputs fold left under the same rule, so the
/// first matrix in the list is always the fastest-varying one. Callers that
/// need the Khatri-Rao product paired with this library's tensor layouts
/// (mode-ascending, lowest mode fastest) therefore pass factors in ascending
/// mode order.
Matrix khatri_rao(std::span<const Matrix* const> matrices);
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Kronecker product of two vectors under the same convention as khatri_rao:
/// the first argument's index varies fastest.
std::vector<double> kron_vec(std::span<const double> a, std::span<const double> b);

/// Elementwise product of all Gram matrices except index `skip` (0-based).
/// Requires at least two matrices, all square of equal size.
Matrix hadamard_all_but(std::span<const Matrix> grams, std::size_t skip);

/// Elementwise product accumulated into `acc`.
void hadamard_in_place(Matrix& acc, const Matrix& m);

}  // namespace tenkit

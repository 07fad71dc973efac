#include "tenkit/matrix.hpp"

#include <stdexcept>
#include <string>

namespace tenkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: data size " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
  }
}

void Matrix::fill(double v) {
  for (auto& x : data_) x = v;
}

namespace kernels {

void gemm_nn(const double* a, std::size_t m, std::size_t k, std::size_t lda,
             const Matrix& b, Matrix& c) {
  if (b.rows() != k) throw std::invalid_argument("gemm_nn: inner dimensions differ");
  const std::size_t n = b.cols();
  if (c.rows() != m || c.cols() != n) c = Matrix(m, n);
  c.fill(0.0);
  // Panel update over the contracted index: A's column is streamed once and
  // applied to every output column, keeping C resident in cache.
  double* cd = c.data();
  const double* bd = b.data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* acol = a + p * lda;
    for (std::size_t j = 0; j < n; ++j) {
      const double bpj = bd[p + j * k];
      if (bpj == 0.0) continue;
      double* ccol = cd + j * m;
      for (std::size_t i = 0; i < m; ++i) ccol[i] += acol[i] * bpj;
    }
  }
}

void gemm_tn(const double* a, std::size_t k, std::size_t m, std::size_t lda,
             const Matrix& b, Matrix& c) {
  if (b.rows() != k) throw std::invalid_argument("gemm_tn: inner dimensions differ");
  const std::size_t n = b.cols();
  if (c.rows() != m || c.cols() != n) c = Matrix(m, n);
  const double* bd = b.data();
  double* cd = c.data();
  for (std::size_t j = 0; j < n; ++j) {
    const double* bcol = bd + j * k;
    double* ccol = cd + j * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double* acol = a + i * lda;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += acol[p] * bcol[p];
      ccol[i] = s;
    }
  }
}

void gemv_n(const double* a, std::size_t m, std::size_t k, std::size_t lda,
            const double* x, double* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double xp = x[p];
    const double* acol = a + p * lda;
    for (std::size_t i = 0; i < m; ++i) y[i] += acol[i] * xp;
  }
}

void gemv_t(const double* a, std::size_t k, std::size_t m, std::size_t lda,
            const double* x, double* y) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* acol = a + i * lda;
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += acol[p] * x[p];
    y[i] = s;
  }
}

}  // namespace kernels

Matrix gram(const Matrix& h) {
  const std::size_t r = h.cols();
  const std::size_t k = h.rows();
  Matrix g(r, r);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double* ci = h.data() + i * k;
      const double* cj = h.data() + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ci[p] * cj[p];
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ (" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + ")");
  }
  const std::size_t r = a.cols();
  Matrix k(a.rows() * b.rows(), r);
  for (std::size_t c = 0; c < r; ++c) {
    const double* ac = a.data() + c * a.rows();
    const double* bc = b.data() + c * b.rows();
    double* kc = k.data() + c * k.rows();
    std::size_t row = 0;
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double bv = bc[j];
      for (std::size_t i = 0; i < a.rows(); ++i) kc[row++] = ac[i] * bv;
    }
  }
  return k;
}

Matrix khatri_rao(std::span<const Matrix* const> matrices) {
  if (matrices.empty()) throw std::invalid_argument("khatri_rao: no input matrices");
  Matrix acc = *matrices[0];
  for (std::size_t i = 1; i < matrices.size(); ++i) acc = khatri_rao(acc, *matrices[i]);
  return acc;
}

std::vector<double> kron_vec(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() * b.size());
  std::size_t idx = 0;
  for (double bv : b)
    for (double av : a) out[idx++] = av * bv;
  return out;
}

void hadamard_in_place(Matrix& acc, const Matrix& m) {
  if (!acc.same_shape(m)) throw std::invalid_argument("hadamard: shapes differ");
  double* a = acc.data();
  const double* b = m.data();
  for (std::size_t i = 0; i < acc.size(); ++i) a[i] *= b[i];
}

Matrix hadamard_all_but(std::span<const Matrix> grams, std::size_t skip) {
  if (grams.size() < 2) throw std::invalid_argument("hadamard_all_but: need at least two matrices");
  if (skip >= grams.size()) throw std::invalid_argument("hadamard_all_but: skip index out of range");
  Matrix acc;
  bool first = true;
  for (std::size_t i = 0; i < grams.size(); ++i) {
    if (i == skip) continue;
    if (first) {
      acc = grams[i];
      first = false;
    } else {
      hadamard_in_place(acc, grams[i]);
    }
  }
  return acc;
}

}  // namespace tenkit

#include "tenkit/kruskal.hpp"

#include <cmath>
#include <stdexcept>

#include "tenkit/rng.hpp"

namespace tenkit {

DenseTensor KruskalModel::expand() const {
  if (factors.empty()) throw std::invalid_argument("expand: model has no factors");
  const std::size_t r = rank();
  std::vector<std::uint64_t> dims;
  dims.reserve(factors.size());
  for (const auto& f : factors) {
    if (f.cols() != r) throw std::invalid_argument("expand: factor rank mismatch");
    dims.push_back(f.rows());
  }
  DenseTensor out(dims);
  std::vector<std::uint64_t> idx(dims.size(), 1);
  for (std::uint64_t flat = 0; flat < out.numel(); ++flat) {
    double v = 0.0;
    for (std::size_t c = 0; c < r; ++c) {
      double term = lambda[c];
      for (std::size_t n = 0; n < factors.size(); ++n) term *= factors[n](idx[n] - 1, c);
      v += term;
    }
    out[flat] = v;
    for (std::size_t n = 0; n < dims.size(); ++n) {
      if (++idx[n] <= dims[n]) break;
      idx[n] = 1;
    }
  }
  return out;
}

std::vector<double> column_sq_norms(const Matrix& h) {
  std::vector<double> sq(h.cols(), 0.0);
  for (std::size_t c = 0; c < h.cols(); ++c) {
    const double* col = h.data() + c * h.rows();
    double s = 0.0;
    for (std::size_t i = 0; i < h.rows(); ++i) s += col[i] * col[i];
    sq[c] = s;
  }
  return sq;
}

void guard_and_sqrt(std::span<double> sq_norms, Matrix& owned_rows, std::uint64_t total_rows) {
  for (std::size_t c = 0; c < sq_norms.size(); ++c) {
    if (sq_norms[c] == 0.0) {
      auto col = owned_rows.col(c);
      for (double& v : col) v = kZeroColumnGuard;
      sq_norms[c] = static_cast<double>(total_rows) * kZeroColumnGuard * kZeroColumnGuard;
    }
    sq_norms[c] = std::sqrt(sq_norms[c]);
  }
}

void scale_columns(Matrix& h, std::span<const double> weights) {
  if (weights.size() != h.cols()) throw std::invalid_argument("scale_columns: weight count mismatch");
  for (std::size_t c = 0; c < h.cols(); ++c) {
    const double inv = 1.0 / weights[c];
    for (double& v : h.col(c)) v *= inv;
  }
}

void multiply_columns(Matrix& h, std::span<const double> weights) {
  if (weights.size() != h.cols())
    throw std::invalid_argument("multiply_columns: weight count mismatch");
  for (std::size_t c = 0; c < h.cols(); ++c) {
    const double w = weights[c];
    for (double& v : h.col(c)) v *= w;
  }
}

std::vector<double> normalize_columns(Matrix& h) {
  std::vector<double> sq = column_sq_norms(h);
  guard_and_sqrt(sq, h, h.rows());
  scale_columns(h, sq);
  return sq;
}

bool is_nonnegative(const Matrix& h) {
  for (double v : h.span())
    if (v < 0.0) return false;
  return true;
}

KruskalModel synthetic_model(std::span<const std::uint64_t> dims, std::size_t rank,
                             std::uint64_t seed, bool all_ones) {
  if (rank == 0) throw std::invalid_argument("synthetic_model: rank must be positive");
  KruskalModel m;
  m.lambda.assign(rank, 1.0);
  m.factors.reserve(dims.size());
  for (std::size_t n = 0; n < dims.size(); ++n) {
    if (all_ones) {
      Matrix f(dims[n], rank);
      f.fill(1.0);
      m.factors.push_back(std::move(f));
    } else {
      m.factors.push_back(
          uniform_matrix(dims[n], rank, derive_seed(seed, (1ULL << 32) + n + 1)));
    }
  }
  return m;
}

}  // namespace tenkit

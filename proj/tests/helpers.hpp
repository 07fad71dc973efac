#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/kruskal.hpp"
#include "tenkit/matrix.hpp"

namespace testutil {

inline tenkit::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                    double lo = 0.0, double hi = 1.0) {
  tenkit::Matrix m(rows, cols);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = dist(rng);
  return m;
}

inline tenkit::DenseTensor random_tensor(const std::vector<std::uint64_t>& dims,
                                         std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  tenkit::DenseTensor t(dims);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (std::uint64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

/// Definitional MTTKRP: loops over every tensor entry and accumulates
/// factor products directly. Independent of all production kernels.
inline tenkit::Matrix mttkrp_by_definition(const tenkit::DenseTensor& t,
                                           const std::vector<const tenkit::Matrix*>& factors,
                                           std::size_t mode1) {
  std::size_t rank = 0;
  for (std::size_t n = 1; n <= t.order(); ++n)
    if (n != mode1) rank = factors[n - 1]->cols();
  tenkit::Matrix m(t.dims()[mode1 - 1], rank);
  for (std::uint64_t flat = 0; flat < t.numel(); ++flat) {
    const auto idx = t.index_of(flat);
    for (std::size_t c = 0; c < rank; ++c) {
      double prod = t[flat];
      for (std::size_t n = 1; n <= t.order(); ++n) {
        if (n == mode1) continue;
        prod *= (*factors[n - 1])(idx[n - 1] - 1, c);
      }
      m(idx[mode1 - 1] - 1, c) += prod;
    }
  }
  return m;
}

/// Definitional dense reconstruction of a Kruskal model.
inline tenkit::DenseTensor expand_by_definition(const tenkit::KruskalModel& model) {
  std::vector<std::uint64_t> dims;
  for (const auto& f : model.factors) dims.push_back(f.rows());
  tenkit::DenseTensor out(dims);
  for (std::uint64_t flat = 0; flat < out.numel(); ++flat) {
    const auto idx = out.index_of(flat);
    double v = 0.0;
    for (std::size_t c = 0; c < model.rank(); ++c) {
      double term = model.lambda[c];
      for (std::size_t n = 0; n < model.order(); ++n) term *= model.factors[n](idx[n] - 1, c);
      v += term;
    }
    out[flat] = v;
  }
  return out;
}

inline double rel_frobenius_gap(const tenkit::Matrix& a, const tenkit::Matrix& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    num += d * d;
    den += b.data()[i] * b.data()[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

/// ||A - expand(model)|| / ||A|| by direct materialization.
inline double reconstruction_error(const tenkit::DenseTensor& t,
                                   const tenkit::KruskalModel& model) {
  const tenkit::DenseTensor full = expand_by_definition(model);
  double num = 0.0, den = 0.0;
  for (std::uint64_t i = 0; i < t.numel(); ++i) {
    const double d = t[i] - full[i];
    num += d * d;
    den += t[i] * t[i];
  }
  return std::sqrt(num / den);
}

}  // namespace testutil

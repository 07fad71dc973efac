#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/matrix.hpp"

namespace tenkit {

/// Value used to refill a factor column that collapsed to all zeros. Keeps
/// the column-norm weights well defined without measurably perturbing the
/// objective.
inline constexpr double kZeroColumnGuard = 1e-16;

/// Rank-R Kruskal model: one In x R factor matrix per mode plus a length-R
/// nonnegative weight vector. After normalize() every factor column has unit
/// 2-norm and the scale lives in lambda.
struct KruskalModel {
  std::vector<Matrix> factors;
  std::vector<double> lambda;

  std::size_t order() const { return factors.size(); }
  std::size_t rank() const { return lambda.size(); }

  /// Materializes the full tensor sum_r lambda_r * h1(:,r) o ... o hN(:,r).
  DenseTensor expand() const;

  bool operator==(const KruskalModel& o) const {
    return factors == o.factors && lambda == o.lambda;
  }
};

/// Squared 2-norm of each column, summed in row order.
std::vector<double> column_sq_norms(const Matrix& h);

/// Turns accumulated squared column norms into weights, applying the
/// zero-column guard: a column whose global squared norm is exactly zero is
/// refilled (by the caller, over the rows it owns) with kZeroColumnGuard and
/// its squared norm replaced by total_rows * kZeroColumnGuard^2 so every
/// participant derives the same weight.
void guard_and_sqrt(std::span<double> sq_norms, Matrix& owned_rows, std::uint64_t total_rows);

/// Scales each column of h by 1/weights[c].
void scale_columns(Matrix& h, std::span<const double> weights);

/// Scales each column of h by weights[c] (restores absorbed weights).
void multiply_columns(Matrix& h, std::span<const double> weights);

/// Normalizes every column of h to unit 2-norm and returns the column norms.
/// All-zero columns are refilled with kZeroColumnGuard first, and their
/// reported norm is the norm of the refilled column.
std::vector<double> normalize_columns(Matrix& h);

/// True if every entry is >= 0.
bool is_nonnegative(const Matrix& h);

/// Exact low-rank generating model with uniform-[0,1) factors and unit
/// weights. Draws come from streams decorrelated from solver initialization,
/// so generating and solving with the same seed stays a fair experiment.
/// With all_ones set, every factor entry is 1 (debug data).
KruskalModel synthetic_model(std::span<const std::uint64_t> dims, std::size_t rank,
                             std::uint64_t seed, bool all_ones = false);

}  // namespace tenkit

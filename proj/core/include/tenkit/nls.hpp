#pragma once

#include <cstdint>
#include <vector>

#include "tenkit/matrix.hpp"

namespace tenkit {

enum class NlsMethod { bpp, hals };

/// Absolute tolerance below which a KKT residual counts as zero.
inline constexpr double kKktZeroTol = 1e-12;

struct NnlsReport {
  /// Rows whose passive-set subsystem went singular and were completed with
  /// a smallest-norm pseudo-solve.
  std::vector<std::size_t> pseudo_solved_rows;
};

/// Exact nonnegative least squares via block principal pivoting.
///
/// For each row m of M, finds h >= 0 with g = S h - m satisfying the KKT
/// system: g is zero on the passive set, nonnegative on the active set, and
/// complementary to h. S is the R x R Gram-product matrix shared by all rows.
///
/// Pivoting: full exchange of all infeasible variables while the
/// infeasibility count keeps dropping; when it stalls, the exchange set is
/// halved on each further stall, and once it reaches a single variable the
/// method exchanges only the lowest-indexed infeasible variable (Murty's
/// finite least-index rule). Throws after the iteration bound with
/// diagnostics. Columns of the result that come out identically zero are
/// refilled with kZeroColumnGuard.
Matrix nnls_bpp(const Matrix& s, const Matrix& m, NnlsReport* report = nullptr);

/// One full cycle r = 1..R of the column update
///   H(:,r) <- [ H(:,r) + M(:,r) - (H S)(:,r) ]_+
/// using the freshest H within the cycle. The rule as written is the exact
/// per-column minimizer when diag(S) = 1, i.e. when all other factor
/// matrices have unit-norm columns; drivers maintain that by normalizing
/// after every update. All-zero result columns are refilled with
/// kZeroColumnGuard.
void hals_update(Matrix& h, const Matrix& m, const Matrix& s);

/// Unconstrained reference solve H = M S^{-1}. Throws if S is singular.
Matrix ls_unconstrained(const Matrix& s, const Matrix& m);

}  // namespace tenkit

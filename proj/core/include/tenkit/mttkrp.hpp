#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/matrix.hpp"

namespace tenkit {

/// Monotone multiply-add counters for the MTTKRP kernels. Counters only
/// grow; reset() is the one explicit way back to zero.
struct FlopLedger {
  std::uint64_t partial_mttkrp = 0;  ///< root-level GEMM contractions
  std::uint64_t multi_ttv = 0;       ///< per-rank-slice GEMV contractions
  std::uint64_t krp = 0;             ///< Khatri-Rao row-product folds
  std::uint64_t full_mttkrp = 0;     ///< single-GEMM reference path

  void reset() { *this = FlopLedger{}; }
  std::uint64_t total() const { return partial_mttkrp + multi_ttv + krp + full_mttkrp; }
};

/// Wall-clock seconds spent in each MTTKRP phase.
struct MttkrpTimers {
  double pm = 0.0;
  double mttv = 0.0;
  double krp = 0.0;
};

/// Khatri-Rao product of the factors for 1-based modes [lo, hi], folded in
/// ascending mode order so the row ordering matches the tensor layout
/// (lowest mode fastest). Fold flops are charged to ledger->krp.
Matrix krp_of_modes(std::span<const Matrix* const> factors, std::size_t lo, std::size_t hi,
                    FlopLedger* ledger = nullptr);
void krp_of_modes_into(std::span<const Matrix* const> factors, std::size_t lo, std::size_t hi,
                       Matrix& out, FlopLedger* ledger = nullptr);

/// Reference MTTKRP: M = A_(n) * K where K is the Khatri-Rao product of all
/// factors except mode n (1-based). Materializes K but never reorders tensor
/// entries. `factors` has one slot per mode; slot n-1 is ignored.
Matrix mttkrp_naive(const DenseTensor& t, std::span<const Matrix* const> factors, std::size_t mode1,
                    FlopLedger* ledger = nullptr, MttkrpTimers* timers = nullptr);

enum class KeepSide { left, right };

/// Contraction of the tensor with the Khatri-Rao product of one contiguous
/// side's factors, leaving the other side plus a trailing rank mode:
/// keeping the left side of a split after mode s gives
///   T(i_1..i_s, r) = sum over the right multi-index of A * krp(row, r).
/// Executed as a single matrix product over the contiguous split
/// matricization; no tensor entries are moved. Charges 2*numel*R multiply-adds.
DenseTensor partial_mttkrp(const DenseTensor& t, const Matrix& krp, std::size_t split,
                           KeepSide keep, FlopLedger* ledger = nullptr);

/// Writes the result into `out` (size: kept-side product x R, column-major,
/// rank slices contiguous).
void partial_mttkrp_into(const DenseTensor& t, const Matrix& krp, std::size_t split,
                         KeepSide keep, Matrix& out, FlopLedger* ledger = nullptr);

enum class MttvTarget {
  keep_lead_mode,  ///< contract all trailing modes; result is d0 x R
  drop_lead_mode,  ///< contract the leading mode; result keeps d1..dk and R
};

/// Multi tensor-times-vector: contracts a temporary tensor (mode dims plus a
/// trailing rank mode, each rank slice contiguous) against column r of the
/// Khatri-Rao product of the eliminated modes' factors, one matrix-vector
/// product per rank slice. Charges 2 * slice-size multiply-adds per slice.
DenseTensor multi_ttv(const DenseTensor& temp, const Matrix& krp, MttvTarget target,
                      FlopLedger* ledger = nullptr);

/// Matrix form: `temp` is prod(mode_dims) x R with rank slices as columns.
void multi_ttv_into(const Matrix& temp, std::span<const std::uint64_t> mode_dims,
                    const Matrix& krp, MttvTarget target, Matrix& out,
                    FlopLedger* ledger = nullptr);

}  // namespace tenkit

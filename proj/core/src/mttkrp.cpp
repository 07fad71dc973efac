#include "tenkit/mttkrp.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace tenkit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t mode_product(std::span<const std::uint64_t> dims, std::size_t lo, std::size_t hi) {
  std::uint64_t p = 1;
  for (std::size_t n = lo; n <= hi; ++n) p *= dims[n - 1];
  return p;
}

}  // namespace

void krp_of_modes_into(std::span<const Matrix* const> factors, std::size_t lo, std::size_t hi,
                       Matrix& out, FlopLedger* ledger) {
  if (lo < 1 || hi > factors.size() || lo > hi)
    throw std::invalid_argument("krp_of_modes: bad mode range");
  if (lo == hi) {
    out = *factors[lo - 1];
    return;
  }
  Matrix acc = *factors[lo - 1];
  for (std::size_t n = lo + 1; n <= hi; ++n) {
    const Matrix& next = *factors[n - 1];
    if (ledger) ledger->krp += acc.rows() * next.rows() * acc.cols();
    Matrix folded = khatri_rao(acc, next);
    if (n == hi)
      out = std::move(folded);
    else
      acc = std::move(folded);
  }
}

Matrix krp_of_modes(std::span<const Matrix* const> factors, std::size_t lo, std::size_t hi,
                    FlopLedger* ledger) {
  Matrix out;
  krp_of_modes_into(factors, lo, hi, out, ledger);
  return out;
}

Matrix mttkrp_naive(const DenseTensor& t, std::span<const Matrix* const> factors, std::size_t mode1,
                    FlopLedger* ledger, MttkrpTimers* timers) {
  const std::size_t order = t.order();
  if (mode1 < 1 || mode1 > order) throw std::invalid_argument("mttkrp: mode out of range");
  if (factors.size() != order) throw std::invalid_argument("mttkrp: one factor slot per mode required");
  std::size_t rank = 0;
  for (std::size_t n = 1; n <= order; ++n) {
    if (n == mode1) continue;
    const Matrix* f = factors[n - 1];
    if (f == nullptr) throw std::invalid_argument("mttkrp: missing factor for mode " + std::to_string(n));
    if (f->rows() != t.dims()[n - 1])
      throw std::invalid_argument("mttkrp: factor rows mismatch in mode " + std::to_string(n));
    if (rank == 0)
      rank = f->cols();
    else if (f->cols() != rank)
      throw std::invalid_argument("mttkrp: factor column counts differ");
  }
  if (rank == 0) throw std::invalid_argument("mttkrp: tensor must have at least two modes");

  // K collects every mode except mode1, still in ascending order. Its row
  // index then advances exactly like the tensor offset with mode1 removed.
  auto t0 = Clock::now();
  Matrix k_left, k_right;
  if (mode1 > 1) krp_of_modes_into(factors, 1, mode1 - 1, k_left, ledger);
  if (mode1 < order) krp_of_modes_into(factors, mode1 + 1, order, k_right, ledger);
  Matrix k;
  if (k_left.empty())
    k = std::move(k_right);
  else if (k_right.empty())
    k = std::move(k_left);
  else {
    if (ledger) ledger->krp += k_left.rows() * k_right.rows() * rank;
    k = khatri_rao(k_left, k_right);
  }
  if (timers) timers->krp += seconds_since(t0);

  t0 = Clock::now();
  const std::uint64_t in = t.dims()[mode1 - 1];
  const std::uint64_t left = mode_product(t.dims(), 1, mode1 - 1);
  const std::uint64_t right = t.numel() / (left * in);
  Matrix m(in, rank);
  const double* a = t.data();
  const double* kd = k.data();
  const std::uint64_t krows = k.rows();
  for (std::uint64_t r2 = 0; r2 < right; ++r2) {
    for (std::uint64_t i = 0; i < in; ++i) {
      const double* block = a + (i + in * r2) * left;
      const std::uint64_t krow0 = left * r2;
      for (std::size_t c = 0; c < rank; ++c) {
        const double* kcol = kd + c * krows + krow0;
        double s = 0.0;
        for (std::uint64_t l = 0; l < left; ++l) s += block[l] * kcol[l];
        m(i, c) += s;
      }
    }
  }
  if (ledger) ledger->full_mttkrp += 2 * t.numel() * rank;
  if (timers) timers->pm += seconds_since(t0);
  return m;
}

void partial_mttkrp_into(const DenseTensor& t, const Matrix& krp, std::size_t split,
                         KeepSide keep, Matrix& out, FlopLedger* ledger) {
  SplitView view(t, split);
  const std::uint64_t contracted = keep == KeepSide::left ? view.cols() : view.rows();
  const std::uint64_t kept = keep == KeepSide::left ? view.rows() : view.cols();
  if (krp.rows() != contracted)
    throw std::invalid_argument("partial_mttkrp: krp rows " + std::to_string(krp.rows()) +
                                " != contracted side " + std::to_string(contracted));
  if (keep == KeepSide::left)
    kernels::gemm_nn(view.data(), view.rows(), view.cols(), view.rows(), krp, out);
  else
    kernels::gemm_tn(view.data(), view.rows(), view.cols(), view.rows(), krp, out);
  if (ledger) ledger->partial_mttkrp += 2 * kept * contracted * krp.cols();
}

DenseTensor partial_mttkrp(const DenseTensor& t, const Matrix& krp, std::size_t split,
                           KeepSide keep, FlopLedger* ledger) {
  Matrix out;
  partial_mttkrp_into(t, krp, split, keep, out, ledger);
  std::vector<std::uint64_t> dims;
  const std::size_t lo = keep == KeepSide::left ? 1 : split + 1;
  const std::size_t hi = keep == KeepSide::left ? split : t.order();
  for (std::size_t n = lo; n <= hi; ++n) dims.push_back(t.dims()[n - 1]);
  dims.push_back(krp.cols());
  std::vector<double> data(out.span().begin(), out.span().end());
  return DenseTensor(std::move(dims), std::move(data));
}

void multi_ttv_into(const Matrix& temp, std::span<const std::uint64_t> mode_dims,
                    const Matrix& krp, MttvTarget target, Matrix& out, FlopLedger* ledger) {
  if (mode_dims.size() < 2)
    throw std::invalid_argument("multi_ttv: need at least two modes in the temporary");
  const std::size_t rank = temp.cols();
  if (krp.cols() != rank) throw std::invalid_argument("multi_ttv: krp rank mismatch");
  const std::uint64_t slice = temp.rows();
  if (slice != mode_product(mode_dims, 1, mode_dims.size()))
    throw std::invalid_argument("multi_ttv: slice size does not match mode dims");
  const std::uint64_t d0 = mode_dims[0];
  const std::uint64_t rest = slice / d0;

  if (target == MttvTarget::keep_lead_mode) {
    if (krp.rows() != rest)
      throw std::invalid_argument("multi_ttv: krp rows must cover the contracted trailing modes");
    if (out.rows() != d0 || out.cols() != rank) out = Matrix(d0, rank);
    for (std::size_t r = 0; r < rank; ++r)
      kernels::gemv_n(temp.data() + r * slice, d0, rest, d0, krp.data() + r * krp.rows(),
                      out.data() + r * d0);
  } else {
    if (krp.rows() != d0)
      throw std::invalid_argument("multi_ttv: krp rows must cover the contracted leading mode");
    if (out.rows() != rest || out.cols() != rank) out = Matrix(rest, rank);
    for (std::size_t r = 0; r < rank; ++r)
      kernels::gemv_t(temp.data() + r * slice, d0, rest, d0, krp.data() + r * krp.rows(),
                      out.data() + r * rest);
  }
  if (ledger) ledger->multi_ttv += 2 * slice * rank;
}

DenseTensor multi_ttv(const DenseTensor& temp, const Matrix& krp, MttvTarget target,
                      FlopLedger* ledger) {
  if (temp.order() < 3)
    throw std::invalid_argument("multi_ttv: temporary must carry at least two modes plus rank");
  std::span<const std::uint64_t> dims = temp.dims();
  const std::size_t rank = dims.back();
  std::vector<std::uint64_t> mode_dims(dims.begin(), dims.end() - 1);
  const std::uint64_t slice = temp.numel() / rank;
  Matrix as_mat(slice, rank, std::vector<double>(temp.span().begin(), temp.span().end()));
  Matrix out;
  multi_ttv_into(as_mat, mode_dims, krp, target, out, ledger);

  std::vector<std::uint64_t> out_dims;
  if (target == MttvTarget::keep_lead_mode)
    out_dims = {mode_dims[0], rank};
  else {
    out_dims.assign(mode_dims.begin() + 1, mode_dims.end());
    out_dims.push_back(rank);
  }
  std::vector<double> data(out.span().begin(), out.span().end());
  return DenseTensor(std::move(out_dims), std::move(data));
}

}  // namespace tenkit

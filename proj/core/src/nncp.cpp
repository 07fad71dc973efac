#include "tenkit/nncp.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenkit/dimension_tree.hpp"
#include "tenkit/mttkrp.hpp"
#include "tenkit/rng.hpp"

namespace tenkit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void NncpConfig::validate() const {
  if (rank == 0) throw std::invalid_argument("rank must be at least 1");
  if (tolerance < 0.0) throw std::invalid_argument("tolerance must be nonnegative");
  if (max_outer_iters == 0) throw std::invalid_argument("need at least one outer iteration");
}

double relative_error(const ErrorAccumulators& acc) {
  if (acc.a_sq == 0.0) throw std::invalid_argument("relative error undefined for a zero tensor");
  const double radicand = (acc.a_sq - 2.0 * acc.inner_prod + acc.model_sq) / acc.a_sq;
  return std::sqrt(radicand > 0.0 ? radicand : 0.0);
}

Matrix init_factor(std::uint64_t rows, std::size_t rank, std::uint64_t seed, std::size_t mode1) {
  return uniform_matrix(rows, rank, derive_seed(seed, mode1));
}

void apply_nls(NlsMethod method, const Matrix& s, const Matrix& m, Matrix& h,
               std::span<const double> lambda) {
  if (method == NlsMethod::bpp) {
    h = nnls_bpp(s, m);
  } else {
    multiply_columns(h, lambda);
    hals_update(h, m, s);
  }
}

double dot_span(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double model_sq_norm(const Matrix& s, const Matrix& g, std::span<const double> lambda) {
  const std::size_t r = s.cols();
  double total = 0.0;
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < r; ++i) total += lambda[i] * lambda[j] * s(i, j) * g(i, j);
  return total;
}

void ensure_finite(std::span<const double> values, const char* phase, std::size_t mode1,
                   std::size_t iter) {
  for (double v : values) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string("non-finite value after ") + phase + " (mode " +
                               std::to_string(mode1) + ", outer iteration " +
                               std::to_string(iter) + ")");
  }
}

NncpResult nncp(const DenseTensor& tensor, const NncpConfig& config,
                const IterationObserver& observer) {
  config.validate();
  const std::size_t order = tensor.order();
  if (order < 2) throw std::invalid_argument("nncp needs a tensor with at least two modes");
  const std::size_t rank = config.rank;

  const double a_sq = tensor.norm_squared();
  if (a_sq == 0.0) throw std::invalid_argument("nncp: input tensor is identically zero");

  // Mode 1 is produced by the first inner iteration, so only modes 2..N are
  // drawn from the generator. All initial columns are normalized to unit
  // norm so the Gram Hadamard products start with unit diagonal.
  std::vector<Matrix> factors(order);
  std::vector<Matrix> grams(order, Matrix(rank, rank));
  std::vector<double> lambda(rank, 1.0);
  factors[0] = Matrix(tensor.dims()[0], rank);
  for (std::size_t n = 2; n <= order; ++n) {
    factors[n - 1] = init_factor(tensor.dims()[n - 1], rank, config.seed, n);
    auto sq = column_sq_norms(factors[n - 1]);
    guard_and_sqrt(sq, factors[n - 1], factors[n - 1].rows());
    scale_columns(factors[n - 1], sq);
    lambda.assign(sq.begin(), sq.end());
    grams[n - 1] = gram(factors[n - 1]);
  }

  std::vector<const Matrix*> factor_ptrs(order);
  for (std::size_t n = 0; n < order; ++n) factor_ptrs[n] = &factors[n];

  std::unique_ptr<TreeMttkrp> tree;
  if (config.use_dimension_tree) tree = std::make_unique<TreeMttkrp>(tensor, rank);

  FlopLedger ledger;
  NncpResult result;
  double prev_eps = 0.0;
  Matrix s_last;  // S(N) of the current outer iteration

  for (std::size_t it = 1; it <= config.max_outer_iters; ++it) {
    IterationRow row;
    row.iter = it;
    const FlopLedger at_start = ledger;
    MttkrpTimers mtimers;
    double inner_prod = 0.0;

    for (std::size_t n = 1; n <= order; ++n) {
      Matrix m;
      if (tree) {
        m = tree->compute(n, factor_ptrs, &ledger, &mtimers);
      } else {
        m = mttkrp_naive(tensor, factor_ptrs, n, &ledger, &mtimers);
      }
      ensure_finite(m.span(), "mttkrp", n, it);

      Matrix s = hadamard_all_but(grams, n - 1);

      auto t0 = Clock::now();
      apply_nls(config.nls, s, m, factors[n - 1], lambda);
      row.t_nls += seconds_since(t0);
      ensure_finite(factors[n - 1].span(), "nls-update", n, it);
      if (!is_nonnegative(factors[n - 1]))
        throw std::runtime_error("nls-update produced a negative entry in mode " +
                                 std::to_string(n));

      if (n == order) {
        t0 = Clock::now();
        inner_prod = dot_span(m.span(), factors[n - 1].span());
        s_last = std::move(s);
        row.t_err += seconds_since(t0);
      }

      t0 = Clock::now();
      auto sq = column_sq_norms(factors[n - 1]);
      guard_and_sqrt(sq, factors[n - 1], factors[n - 1].rows());
      scale_columns(factors[n - 1], sq);
      lambda.assign(sq.begin(), sq.end());
      ensure_finite(lambda, "normalization", n, it);
      grams[n - 1] = gram(factors[n - 1]);
      row.t_gram += seconds_since(t0);

      if (tree) tree->invalidate(n);
    }

    auto t0 = Clock::now();
    ErrorAccumulators acc;
    acc.a_sq = a_sq;
    acc.inner_prod = inner_prod;
    acc.model_sq = model_sq_norm(s_last, grams[order - 1], lambda);
    const double eps = relative_error(acc);
    row.t_err += seconds_since(t0);
    ensure_finite(std::span<const double>(&eps, 1), "error", order, it);

    row.eps = eps;
    row.t_pm = mtimers.pm;
    row.t_mttv = mtimers.mttv;
    row.t_krp = mtimers.krp;
    row.flops_pm = ledger.partial_mttkrp - at_start.partial_mttkrp;
    row.flops_mttv = ledger.multi_ttv - at_start.multi_ttv;
    row.flops_krp = ledger.krp - at_start.krp;
    result.trace.rows.push_back(row);

    if (observer) {
      KruskalModel snapshot;
      snapshot.factors = factors;
      snapshot.lambda = lambda;
      observer(it, snapshot, eps);
    }

    if (it > 1 && std::abs(eps - prev_eps) < config.tolerance) break;
    prev_eps = eps;
  }

  result.model.factors = std::move(factors);
  result.model.lambda = std::move(lambda);
  return result;
}

}  // namespace tenkit

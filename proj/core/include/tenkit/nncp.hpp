#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/kruskal.hpp"
#include "tenkit/matrix.hpp"
#include "tenkit/nls.hpp"
#include "tenkit/trace.hpp"

namespace tenkit {

struct NncpConfig {
  std::size_t rank = 1;
  std::size_t max_outer_iters = 100;
  /// Stop when |eps_t - eps_{t-1}| < tolerance; 0 runs a fixed iteration
  /// count.
  double tolerance = 0.0;
  NlsMethod nls = NlsMethod::bpp;
  bool use_dimension_tree = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Running terms of the squared-error expansion
/// ||A - M||^2 = ||A||^2 - 2<A, M> + ||M||^2, where the inner product comes
/// from the last mode's MTTKRP result paired with the pre-normalization
/// factor, and the model norm from lambda' (S * G) lambda.
struct ErrorAccumulators {
  double a_sq = 0.0;       ///< ||A||^2
  double inner_prod = 0.0; ///< <M(N), H-hat(N)>
  double model_sq = 0.0;   ///< lambda' (S(N) * G(N)) lambda
};

/// eps = sqrt((a_sq - 2 inner + model) / a_sq), radicand clamped at 0.
/// Throws for a zero tensor.
double relative_error(const ErrorAccumulators& acc);

struct NncpResult {
  KruskalModel model;
  IterationTrace trace;
};

/// Called after each outer iteration with the current normalized model.
using IterationObserver = std::function<void(std::size_t iter, const KruskalModel&, double eps)>;

/// Sequential block coordinate descent for nonnegative CP. Cycles over the
/// modes; each inner iteration computes the mode's MTTKRP (through the
/// dimension tree unless disabled), the Gram Hadamard product, a nonnegative
/// update of the factor, column normalization into lambda, and a Gram
/// refresh. The relative error is evaluated once per outer iteration from
/// the mode-N byproducts.
NncpResult nncp(const DenseTensor& tensor, const NncpConfig& config,
                const IterationObserver& observer = {});

/// Shared driver pieces (also used by the distributed driver).

/// Mode-n initial factor: i.i.d. uniform [0,1) draws from the seeded
/// generator, one decorrelated stream per mode.
Matrix init_factor(std::uint64_t rows, std::size_t rank, std::uint64_t seed, std::size_t mode1);

/// Applies the configured nonnegative update. For BPP `h` is overwritten
/// with the exact solution; for HALS `h` must hold the current factor rows
/// (unit columns) and is first rescaled by `lambda` so the column cycle
/// starts from the actual current iterate.
void apply_nls(NlsMethod method, const Matrix& s, const Matrix& m, Matrix& h,
               std::span<const double> lambda);

double dot_span(std::span<const double> a, std::span<const double> b);

/// lambda' (S * G) lambda, accumulated column-major.
double model_sq_norm(const Matrix& s, const Matrix& g, std::span<const double> lambda);

/// Throws if any value is non-finite, naming the offending phase.
void ensure_finite(std::span<const double> values, const char* phase, std::size_t mode1,
                   std::size_t iter);

}  // namespace tenkit

#include "tenkit/par/par_nncp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>

#include "tenkit/dimension_tree.hpp"
#include "tenkit/mttkrp.hpp"
#include "tenkit/par/distribution.hpp"
#include "tenkit/rng.hpp"

namespace tenkit::par {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Column-major matrix packed row-major so that row blocks are contiguous
/// in the communication buffer.
void pack_rows(const Matrix& m, std::span<double> buf) {
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t c = 0; c < cols; ++c) {
    const double* col = m.data() + c * rows;
    for (std::size_t i = 0; i < rows; ++i) buf[i * cols + c] = col[i];
  }
}

void unpack_rows(std::span<const double> buf, Matrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t c = 0; c < cols; ++c) {
    double* col = m.data() + c * rows;
    for (std::size_t i = 0; i < rows; ++i) col[i] = buf[i * cols + c];
  }
}

/// FNV-1a over the bit pattern, returned as two exactly-representable
/// doubles so it can travel through a double collective.
std::pair<double, double> bit_hash(std::span<const double> values) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return {static_cast<double>(h >> 32), static_cast<double>(h & 0xffffffffULL)};
}

struct WorkerState {
  int rank = -1;
  DenseTensor local;
  std::vector<Matrix> owned;     // H(n) rows owned by this worker
  std::vector<Matrix> gathered;  // H(n) rows shared across the mode-n slice
  std::vector<Matrix> grams;     // replicated R x R Gram matrices
  std::vector<double> lambda;
  std::unique_ptr<TreeMttkrp> tree;
  FlopLedger flops;
  IterationTrace trace;
  double a_sq = 0.0;
  // staging buffers for packed communication
  std::vector<double> comm_in, comm_out, norm_buf, err_buf;
};

struct ParRun {
  const ParNncpConfig* config;
  const ProcessGrid* grid;
  const BlockDistribution* dist;
  Fabric* fabric;
  std::vector<WorkerState> workers;
};

/// Owned rows of the freshly drawn mode-n factor; rows beyond the true
/// extent (padding) stay zero.
Matrix owned_init_rows(const Matrix& full, const BlockDistribution& dist, std::size_t mode1,
                       int rank) {
  const std::uint64_t rows = dist.owned_rows(mode1, rank);
  const std::uint64_t offset = dist.owned_row_offset(mode1, rank);
  Matrix out(rows, full.cols());
  for (std::uint64_t i = 0; i < rows; ++i) {
    const std::uint64_t g = offset + i;
    if (g >= full.rows()) continue;
    for (std::size_t c = 0; c < full.cols(); ++c) out(i, c) = full(g, c);
  }
  return out;
}

WorkerTask par_worker(ParRun& run, int rank) {
  WorkerState& w = run.workers[rank];
  Fabric& fab = *run.fabric;
  const ParNncpConfig& cfg = *run.config;
  const BlockDistribution& dist = *run.dist;
  const std::size_t order = run.grid->order();
  const std::size_t r = cfg.base.rank;
  const int all = fab.all_group();
  const auto coord = run.grid->coord_of(rank);
  const int world = run.grid->size();

  w.norm_buf.assign(r, 0.0);
  w.err_buf.assign(1, 0.0);
  std::size_t max_slice = 0;
  for (std::size_t n = 1; n <= order; ++n)
    max_slice = std::max<std::size_t>(max_slice, dist.slice_rows(n));
  w.comm_in.assign(max_slice * r, 0.0);
  w.comm_out.assign(max_slice * r, 0.0);

  // Squared tensor norm, fixed for the whole run.
  w.err_buf[0] = w.local.norm_squared();
  co_await fab.all_reduce(rank, all, std::span(w.err_buf).first(1), 0, "error");
  w.a_sq = w.err_buf[0];
  if (w.a_sq == 0.0) throw std::invalid_argument("par_nncp: input tensor is identically zero");

  // Factor state. Mode 1 is produced by the first inner iteration, so only
  // modes 2..N are drawn, normalized, and gathered here.
  w.owned.resize(order);
  w.gathered.resize(order);
  w.grams.assign(order, Matrix(r, r));
  w.lambda.assign(r, 1.0);
  w.owned[0] = Matrix(dist.owned_rows(1, rank), r);
  w.gathered[0] = Matrix(dist.slice_rows(1), r);
  for (std::size_t n = 2; n <= order; ++n) {
    const Matrix full = init_factor(dist.tensor_dims()[n - 1], r, cfg.base.seed, n);
    w.owned[n - 1] = owned_init_rows(full, dist, n, rank);

    auto sq = column_sq_norms(w.owned[n - 1]);
    std::copy(sq.begin(), sq.end(), w.norm_buf.begin());
    co_await fab.all_reduce(rank, all, std::span(w.norm_buf).first(r), 0, "gram");
    guard_and_sqrt(std::span(w.norm_buf).first(r), w.owned[n - 1], dist.padded_dims()[n - 1]);
    scale_columns(w.owned[n - 1], std::span(w.norm_buf).first(r));
    w.lambda.assign(w.norm_buf.begin(), w.norm_buf.begin() + r);

    Matrix gbar = gram(w.owned[n - 1]);
    co_await fab.all_reduce(rank, all, gbar.span(), 0, "gram");
    w.grams[n - 1] = std::move(gbar);

    const int slice = fab.slice_group(n, coord[n - 1]);
    const std::size_t own_words = dist.owned_rows(n, rank) * r;
    const std::size_t slice_words = dist.slice_rows(n) * r;
    pack_rows(w.owned[n - 1], std::span(w.comm_in).first(own_words));
    co_await fab.all_gather(rank, slice, std::span(w.comm_in).first(own_words),
                            std::span(w.comm_out).first(slice_words), 0, "factor");
    w.gathered[n - 1] = Matrix(dist.slice_rows(n), r);
    unpack_rows(std::span(w.comm_out).first(slice_words), w.gathered[n - 1]);
  }

  if (cfg.base.use_dimension_tree) w.tree = std::make_unique<TreeMttkrp>(w.local, r);

  std::vector<const Matrix*> gathered_ptrs(order);
  for (std::size_t n = 0; n < order; ++n) gathered_ptrs[n] = &w.gathered[n];

  double prev_eps = 0.0;
  Matrix s_last;
  for (std::size_t it = 1; it <= cfg.base.max_outer_iters; ++it) {
    IterationRow row;
    row.iter = it;
    const FlopLedger at_start = w.flops;
    MttkrpTimers timers;
    double inner_local = 0.0;

    for (std::size_t n = 1; n <= order; ++n) {
      const int slice = fab.slice_group(n, coord[n - 1]);
      const std::size_t slice_words = dist.slice_rows(n) * r;
      const std::size_t own_words = dist.owned_rows(n, rank) * r;
      std::vector<std::uint64_t> partition = dist.owned_partition(n);
      for (auto& len : partition) len *= r;

      // Local contribution to M(n), summed across the slice and landed
      // row-partitioned on its owners.
      if (w.tree) {
        const Matrix& mbar = w.tree->compute(n, gathered_ptrs, &w.flops, &timers);
        pack_rows(mbar, std::span(w.comm_in).first(slice_words));
      } else {
        const Matrix mbar = mttkrp_naive(w.local, gathered_ptrs, n, &w.flops, &timers);
        pack_rows(mbar, std::span(w.comm_in).first(slice_words));
      }
      co_await fab.reduce_scatter(rank, slice, std::span(w.comm_in).first(slice_words),
                                  std::span(w.comm_out).first(own_words), partition, it,
                                  "factor");
      Matrix mp(dist.owned_rows(n, rank), r);
      unpack_rows(std::span(w.comm_out).first(own_words), mp);
      ensure_finite(mp.span(), "mttkrp", n, it);

      Matrix s = hadamard_all_but(w.grams, n - 1);

      auto t0 = Clock::now();
      apply_nls(cfg.base.nls, s, mp, w.owned[n - 1], w.lambda);
      row.t_nls += seconds_since(t0);
      ensure_finite(w.owned[n - 1].span(), "nls-update", n, it);
      if (!is_nonnegative(w.owned[n - 1]))
        throw std::runtime_error("nls-update produced a negative entry in mode " +
                                 std::to_string(n));

      if (n == order) {
        t0 = Clock::now();
        inner_local = dot_span(mp.span(), w.owned[n - 1].span());
        s_last = std::move(s);
        row.t_err += seconds_since(t0);
      }

      t0 = Clock::now();
      auto sq = column_sq_norms(w.owned[n - 1]);
      std::copy(sq.begin(), sq.end(), w.norm_buf.begin());
      co_await fab.all_reduce(rank, all, std::span(w.norm_buf).first(r), it, "gram");
      guard_and_sqrt(std::span(w.norm_buf).first(r), w.owned[n - 1], dist.padded_dims()[n - 1]);
      scale_columns(w.owned[n - 1], std::span(w.norm_buf).first(r));
      w.lambda.assign(w.norm_buf.begin(), w.norm_buf.begin() + r);
      ensure_finite(w.lambda, "normalization", n, it);

      Matrix gbar = gram(w.owned[n - 1]);
      co_await fab.all_reduce(rank, all, gbar.span(), it, "gram");
      w.grams[n - 1] = std::move(gbar);
      row.t_gram += seconds_since(t0);

      pack_rows(w.owned[n - 1], std::span(w.comm_in).first(own_words));
      co_await fab.all_gather(rank, slice, std::span(w.comm_in).first(own_words),
                              std::span(w.comm_out).first(slice_words), it, "factor");
      unpack_rows(std::span(w.comm_out).first(slice_words), w.gathered[n - 1]);
      if (w.tree) w.tree->invalidate(n);

      if (cfg.validate_replication && world > 1) {
        // Unledgered: compare bit hashes of the gathered rows across the
        // slice.
        const auto h = bit_hash(w.gathered[n - 1].span());
        const std::size_t members = fab.group_members(slice).size();
        std::vector<double> mine{h.first, h.second};
        std::vector<double> alls(2 * members);
        co_await fab.all_gather(rank, slice, mine, alls, it, "check", /*record=*/false);
        for (std::size_t q = 0; q < members; ++q)
          if (alls[2 * q] != h.first || alls[2 * q + 1] != h.second)
            throw std::logic_error("replication invariant violated in mode " + std::to_string(n) +
                                   " at outer iteration " + std::to_string(it));
      }
    }

    auto t0 = Clock::now();
    const double gamma = model_sq_norm(s_last, w.grams[order - 1], w.lambda);
    w.err_buf[0] = inner_local;
    co_await fab.all_reduce(rank, all, std::span(w.err_buf).first(1), it, "error");
    ErrorAccumulators acc;
    acc.a_sq = w.a_sq;
    acc.inner_prod = w.err_buf[0];
    acc.model_sq = gamma;
    const double eps = relative_error(acc);
    row.t_err += seconds_since(t0);
    ensure_finite(std::span<const double>(&eps, 1), "error", order, it);

    row.eps = eps;
    row.t_pm = timers.pm;
    row.t_mttv = timers.mttv;
    row.t_krp = timers.krp;
    row.flops_pm = w.flops.partial_mttkrp - at_start.partial_mttkrp;
    row.flops_mttv = w.flops.multi_ttv - at_start.multi_ttv;
    row.flops_krp = w.flops.krp - at_start.krp;
    w.trace.rows.push_back(row);

    if (it > 1 && std::abs(eps - prev_eps) < cfg.base.tolerance) break;
    prev_eps = eps;
  }
  co_return;
}

}  // namespace

ParNncpResult par_nncp(const DenseTensor& tensor, const ParNncpConfig& config) {
  config.base.validate();
  if (tensor.order() < 2) throw std::invalid_argument("par_nncp needs at least two modes");
  if (config.grid_dims.size() != tensor.order())
    throw std::invalid_argument("grid order must match tensor order");

  ProcessGrid grid(config.grid_dims);
  BlockDistribution dist(tensor.dims(), grid, config.allow_padding);
  CommLedger ledger;
  Fabric fabric(grid, config.mode, &ledger);

  ParRun run;
  run.config = &config;
  run.grid = &grid;
  run.dist = &dist;
  run.fabric = &fabric;
  run.workers.resize(grid.size());
  for (int r = 0; r < grid.size(); ++r) {
    run.workers[r].rank = r;
    run.workers[r].local = dist.local_block(tensor, r);
  }

  Fabric::run_spmd(grid, config.mode, fabric, [&run](int rank) {
    return par_worker(run, rank);
  });

  ParNncpResult result;
  result.comm = ledger.sorted();

  // Assemble the model from the owned row blocks, trimming padding.
  const std::size_t rank_r = config.base.rank;
  result.model.factors.reserve(tensor.order());
  for (std::size_t n = 1; n <= tensor.order(); ++n) {
    Matrix h(tensor.dims()[n - 1], rank_r);
    for (int wr = 0; wr < grid.size(); ++wr) {
      const Matrix& block = run.workers[wr].owned[n - 1];
      const std::uint64_t offset = dist.owned_row_offset(n, wr);
      for (std::uint64_t i = 0; i < block.rows(); ++i) {
        const std::uint64_t g = offset + i;
        if (g >= h.rows()) break;
        for (std::size_t c = 0; c < rank_r; ++c) h(g, c) = block(i, c);
      }
    }
    result.model.factors.push_back(std::move(h));
  }
  result.model.lambda = run.workers[0].lambda;

  // Worker 0 carries the shared per-iteration scalars; flop counts and
  // compute timers are summed over workers. Communication columns come from
  // the ledger, weighted per worker.
  result.trace = run.workers[0].trace;
  for (auto& row : result.trace.rows) {
    row.flops_pm = 0;
    row.flops_mttv = 0;
    row.flops_krp = 0;
    row.t_pm = row.t_mttv = row.t_krp = row.t_nls = row.t_gram = 0.0;
  }
  for (const auto& w : run.workers) {
    for (std::size_t i = 0; i < result.trace.rows.size(); ++i) {
      if (i >= w.trace.rows.size()) break;
      auto& dst = result.trace.rows[i];
      const auto& src = w.trace.rows[i];
      dst.flops_pm += src.flops_pm;
      dst.flops_mttv += src.flops_mttv;
      dst.flops_krp += src.flops_krp;
      dst.t_pm += src.t_pm;
      dst.t_mttv += src.t_mttv;
      dst.t_krp += src.t_krp;
      dst.t_nls += src.t_nls;
      dst.t_gram += src.t_gram;
    }
  }
  const double world = static_cast<double>(grid.size());
  for (const auto& rec : result.comm) {
    if (rec.iter == 0 || rec.iter > result.trace.rows.size()) continue;
    auto& row = result.trace.rows[rec.iter - 1];
    const double share = static_cast<double>(rec.group_size) / world;
    const double cost = config.cost_model.cost(rec.kind, rec.group_size,
                                               static_cast<double>(rec.words));
    if (rec.tag == "factor") {
      row.t_factor_comm += cost * share;
      row.words_factor += moved_words(rec) * share;
    } else if (rec.tag == "gram") {
      row.t_gram_comm += cost * share;
      row.words_gram += moved_words(rec) * share;
    }
  }
  return result;
}

}  // namespace tenkit::par

#pragma once

#include <cstdint>
#include <vector>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/kruskal.hpp"
#include "tenkit/nncp.hpp"
#include "tenkit/par/comm.hpp"
#include "tenkit/par/process_grid.hpp"
#include "tenkit/trace.hpp"

namespace tenkit::par {

struct ParNncpConfig {
  NncpConfig base;
  std::vector<std::uint64_t> grid_dims;
  ExecutionMode mode = ExecutionMode::simulated;
  /// Zero-pad extents that the grid does not divide; padded factor rows are
  /// computed but trimmed from the returned model.
  bool allow_padding = false;
  CostModel cost_model;
  /// After every inner iteration, assert (via unledgered traffic) that all
  /// workers of a mode slice hold bitwise-identical gathered factor rows.
  bool validate_replication = false;
};

struct ParNncpResult {
  KruskalModel model;
  IterationTrace trace;
  std::vector<CommRecord> comm;  ///< executed collectives, stable order
};

/// Distributed block coordinate descent over a virtual worker grid. Each
/// inner iteration runs the local MTTKRP from gathered factor slices, a
/// Reduce-Scatter of the contribution over the mode slice, the replicated
/// Gram Hadamard product, a local nonnegative update of the owned rows,
/// column normalization via an All-Reduce of squared norms, a Gram refresh
/// via All-Reduce, and an All-Gather of the new rows across the mode slice.
/// The relative error is accumulated from the mode-N byproducts with one
/// extra scalar All-Reduce per outer iteration. Dimension trees are applied
/// to each worker's local block.
ParNncpResult par_nncp(const DenseTensor& tensor, const ParNncpConfig& config);

}  // namespace tenkit::par

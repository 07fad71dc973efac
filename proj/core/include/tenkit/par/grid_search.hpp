#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tenkit::par {

/// A candidate processor grid for a given tensor, scored by the per-worker
/// factor-communication volume sum_n In/Pn (which also bounds the replicated
/// factor memory).
struct GridChoice {
  std::vector<std::uint64_t> grid_dims;
  double objective = 0.0;   ///< sum_n In/Pn
  double comm_words = 0.0;  ///< R * objective when a rank is supplied
};

/// All ordered factorizations of P into order-many factors.
std::vector<std::vector<std::uint64_t>> enumerate_grids(std::uint64_t p, std::size_t order);

/// Exhaustively minimizes sum_n In/Pn over ordered factorizations of P;
/// ties break toward the lexicographically smallest grid. `rank` only scales
/// the reported communication words.
GridChoice optimize_grid(std::span<const std::uint64_t> dims, std::uint64_t p,
                         std::size_t rank = 1);

/// Leading-order per-iteration costs of the distributed decomposition on a
/// given grid, with and without the dimension-tree reuse. Constants are
/// dropped: computation is IR/P (tree) vs NIR/P, communication and factor
/// replicas are R sum_n In/Pn, and the MTTKRP temporary is R sqrt(I/P) with
/// the tree vs max_n R (I/In)/(P/Pn) without it.
struct CostEstimate {
  double compute_flops_tree = 0.0;
  double compute_flops_flat = 0.0;
  double comm_words = 0.0;
  double memory_replica_words = 0.0;
  double mttkrp_temp_words_tree = 0.0;
  double mttkrp_temp_words_flat = 0.0;
};

CostEstimate estimate_costs(std::span<const std::uint64_t> dims,
                            std::span<const std::uint64_t> grid_dims, std::size_t rank);

}  // namespace tenkit::par

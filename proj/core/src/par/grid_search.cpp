#include "tenkit/par/grid_search.hpp"

#include <cmath>
#include <stdexcept>

namespace tenkit::par {
namespace {

void enumerate_rec(std::uint64_t remaining, std::size_t slots, std::vector<std::uint64_t>& prefix,
                   std::vector<std::vector<std::uint64_t>>& out) {
  if (slots == 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (std::uint64_t d = 1; d <= remaining; ++d) {
    if (remaining % d != 0) continue;
    prefix.push_back(d);
    enumerate_rec(remaining / d, slots - 1, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<std::vector<std::uint64_t>> enumerate_grids(std::uint64_t p, std::size_t order) {
  if (p == 0) throw std::invalid_argument("worker count must be positive");
  if (order == 0) throw std::invalid_argument("grid order must be positive");
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> prefix;
  enumerate_rec(p, order, prefix, out);
  return out;
}

GridChoice optimize_grid(std::span<const std::uint64_t> dims, std::uint64_t p, std::size_t rank) {
  GridChoice best;
  for (auto& grid : enumerate_grids(p, dims.size())) {
    double objective = 0.0;
    for (std::size_t n = 0; n < dims.size(); ++n)
      objective += static_cast<double>(dims[n]) / static_cast<double>(grid[n]);
    if (best.grid_dims.empty() || objective < best.objective ||
        (objective == best.objective && grid < best.grid_dims)) {
      best.grid_dims = std::move(grid);
      best.objective = objective;
    }
  }
  best.comm_words = static_cast<double>(rank) * best.objective;
  return best;
}

CostEstimate estimate_costs(std::span<const std::uint64_t> dims,
                            std::span<const std::uint64_t> grid_dims, std::size_t rank) {
  if (dims.size() != grid_dims.size())
    throw std::invalid_argument("estimate_costs: grid order does not match tensor order");
  const double r = static_cast<double>(rank);
  const double n = static_cast<double>(dims.size());
  double numel = 1.0;
  double workers = 1.0;
  double replica = 0.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    numel *= static_cast<double>(dims[i]);
    workers *= static_cast<double>(grid_dims[i]);
    replica += static_cast<double>(dims[i]) / static_cast<double>(grid_dims[i]);
  }

  CostEstimate est;
  est.compute_flops_tree = numel * r / workers;
  est.compute_flops_flat = n * numel * r / workers;
  est.comm_words = r * replica;
  est.memory_replica_words = r * replica;
  est.mttkrp_temp_words_tree = r * std::sqrt(numel / workers);
  double worst = 0.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const double others = (numel / static_cast<double>(dims[i])) /
                          (workers / static_cast<double>(grid_dims[i]));
    if (r * others > worst) worst = r * others;
  }
  est.mttkrp_temp_words_flat = worst;
  return est;
}

}  // namespace tenkit::par

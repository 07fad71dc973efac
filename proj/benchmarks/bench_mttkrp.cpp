#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tenkit/dimension_tree.hpp"
#include "tenkit/mttkrp.hpp"

namespace {

struct Problem {
  tenkit::DenseTensor tensor;
  std::vector<tenkit::Matrix> factors;
  std::vector<const tenkit::Matrix*> ptrs;
};

Problem make_problem(std::size_t order, std::uint64_t dim, std::size_t rank) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Problem p{tenkit::DenseTensor(std::vector<std::uint64_t>(order, dim)), {}, {}};
  for (std::uint64_t i = 0; i < p.tensor.numel(); ++i) p.tensor[i] = dist(rng);
  for (std::size_t n = 0; n < order; ++n) {
    tenkit::Matrix f(dim, rank);
    for (auto& v : f.span()) v = dist(rng);
    p.factors.push_back(std::move(f));
  }
  for (const auto& f : p.factors) p.ptrs.push_back(&f);
  return p;
}

}  // namespace

static void BM_tree_sweep(benchmark::State& state) {
  const auto order = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::uint64_t>(state.range(1));
  const auto rank = static_cast<std::size_t>(state.range(2));
  Problem p = make_problem(order, dim, rank);
  tenkit::TreeMttkrp tree(p.tensor, rank);
  for (auto _ : state) {
    tree.sweep(p.ptrs, [](std::size_t, const tenkit::Matrix& m) {
      benchmark::DoNotOptimize(m.data());
    });
  }
  state.SetItemsProcessed(state.iterations() * 4 * p.tensor.numel() * rank);
}
BENCHMARK(BM_tree_sweep)
    ->Args({3, 64, 16})
    ->Args({4, 24, 16})
    ->Args({5, 12, 16});

static void BM_flat_sweep(benchmark::State& state) {
  const auto order = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::uint64_t>(state.range(1));
  const auto rank = static_cast<std::size_t>(state.range(2));
  Problem p = make_problem(order, dim, rank);
  for (auto _ : state) {
    for (std::size_t n = 1; n <= order; ++n) {
      auto m = tenkit::mttkrp_naive(p.tensor, p.ptrs, n);
      benchmark::DoNotOptimize(m.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * 2 * order * p.tensor.numel() * rank);
}
BENCHMARK(BM_flat_sweep)
    ->Args({3, 64, 16})
    ->Args({4, 24, 16})
    ->Args({5, 12, 16});

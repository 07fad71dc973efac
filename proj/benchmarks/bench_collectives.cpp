#include <benchmark/benchmark.h>

#include <vector>

#include "tenkit/par/comm.hpp"

using namespace tenkit::par;

static void BM_all_reduce(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  const std::size_t words = static_cast<std::size_t>(state.range(1));
  const auto mode =
      state.range(2) == 0 ? ExecutionMode::simulated : ExecutionMode::threaded;
  ProcessGrid grid({static_cast<std::uint64_t>(workers)});
  std::vector<std::vector<double>> bufs(workers, std::vector<double>(words, 1.0));
  for (auto _ : state) {
    Fabric fabric(grid, mode, nullptr);
    Fabric::run_spmd(grid, mode, fabric, [&](int rank) -> WorkerTask {
      co_await fabric.all_reduce(rank, fabric.all_group(), bufs[rank], 1, "bench");
    });
    benchmark::DoNotOptimize(bufs[0].data());
  }
  state.SetBytesProcessed(state.iterations() * workers * words * sizeof(double));
}
BENCHMARK(BM_all_reduce)
    ->Args({8, 1 << 10, 0})
    ->Args({8, 1 << 16, 0})
    ->Args({8, 1 << 10, 1})
    ->Args({8, 1 << 16, 1});

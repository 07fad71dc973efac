#include <benchmark/benchmark.h>

#include <random>

#include "tenkit/kruskal.hpp"
#include "tenkit/nls.hpp"

namespace {

struct Instance {
  tenkit::Matrix s, m, h;
};

Instance make_instance(std::size_t rank, std::size_t rows) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  tenkit::Matrix f1(rows + rank, rank), f2(rows + rank, rank);
  for (auto& v : f1.span()) v = dist(rng);
  for (auto& v : f2.span()) v = dist(rng);
  tenkit::normalize_columns(f1);
  tenkit::normalize_columns(f2);
  tenkit::Matrix s = tenkit::gram(f1);
  tenkit::hadamard_in_place(s, tenkit::gram(f2));
  tenkit::Matrix m(rows, rank), h(rows, rank);
  std::uniform_real_distribution<double> md(-0.5, 1.0);
  for (auto& v : m.span()) v = md(rng);
  for (auto& v : h.span()) v = dist(rng);
  return {std::move(s), std::move(m), std::move(h)};
}

}  // namespace

static void BM_bpp(benchmark::State& state) {
  auto inst = make_instance(static_cast<std::size_t>(state.range(0)),
                            static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto h = tenkit::nnls_bpp(inst.s, inst.m);
    benchmark::DoNotOptimize(h.data());
  }
  state.SetItemsProcessed(state.iterations() * inst.m.rows());
}
BENCHMARK(BM_bpp)->Args({8, 256})->Args({16, 256})->Args({32, 256});

static void BM_hals_cycle(benchmark::State& state) {
  auto inst = make_instance(static_cast<std::size_t>(state.range(0)),
                            static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    tenkit::hals_update(inst.h, inst.m, inst.s);
    benchmark::DoNotOptimize(inst.h.data());
  }
  state.SetItemsProcessed(state.iterations() * inst.m.rows());
}
BENCHMARK(BM_hals_cycle)->Args({8, 256})->Args({16, 256})->Args({32, 256});

#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <random>
#include <set>

#include "tenkit/par/grid_search.hpp"

using namespace tenkit::par;

namespace {

/// Second, independent enumerator: iterates divisor tuples in reverse
/// lexicographic order by walking candidate values downward.
void enumerate_desc(std::uint64_t remaining, std::size_t slots,
                    std::vector<std::uint64_t>& prefix,
                    std::vector<std::vector<std::uint64_t>>& out) {
  if (slots == 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (std::uint64_t d = remaining; d >= 1; --d) {
    if (remaining % d != 0) continue;
    prefix.push_back(d);
    enumerate_desc(remaining / d, slots - 1, prefix, out);
    prefix.pop_back();
  }
}

GridChoice optimize_by_second_enumerator(std::span<const std::uint64_t> dims, std::uint64_t p) {
  std::vector<std::vector<std::uint64_t>> grids;
  std::vector<std::uint64_t> prefix;
  enumerate_desc(p, dims.size(), prefix, grids);
  GridChoice best;
  for (const auto& g : grids) {
    double obj = 0.0;
    for (std::size_t n = 0; n < dims.size(); ++n)
      obj += static_cast<double>(dims[n]) / static_cast<double>(g[n]);
    if (best.grid_dims.empty() || obj < best.objective ||
        (obj == best.objective && g < best.grid_dims)) {
      best.grid_dims = g;
      best.objective = obj;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("cubical tensors want cubical grids") {
  std::vector<std::uint64_t> dims{1024, 1024, 1024};
  auto choice = optimize_grid(dims, 64);
  CHECK(choice.grid_dims == std::vector<std::uint64_t>{4, 4, 4});
  CHECK(choice.objective == doctest::Approx(3 * 256.0));
}

TEST_CASE("skewed tensors put workers on the long modes") {
  std::vector<std::uint64_t> dims{1024, 1344, 33};
  auto choice = optimize_grid(dims, 16);
  CHECK(choice.grid_dims == std::vector<std::uint64_t>{4, 4, 1});
  CHECK(choice.objective == doctest::Approx(256.0 + 336.0 + 33.0));
}

TEST_CASE("single worker degenerates to the all-ones grid") {
  std::vector<std::uint64_t> dims{7, 9, 11, 2};
  auto choice = optimize_grid(dims, 1);
  CHECK(choice.grid_dims == std::vector<std::uint64_t>{1, 1, 1, 1});
}

TEST_CASE("optimizer agrees with an independent enumerator") {
  std::mt19937_64 rng(111);
  for (std::uint64_t p = 1; p <= 64; ++p) {
    std::vector<std::uint64_t> dims{1 + rng() % 500, 1 + rng() % 500, 1 + rng() % 500};
    auto a = optimize_grid(dims, p);
    auto b = optimize_by_second_enumerator(dims, p);
    CHECK(a.grid_dims == b.grid_dims);
    CHECK(a.objective == doctest::Approx(b.objective));
  }
}

TEST_CASE("81 workers over four modes have five distinct shapes") {
  auto grids = enumerate_grids(81, 4);
  std::set<std::vector<std::uint64_t>> shapes;
  for (auto g : grids) {
    std::sort(g.begin(), g.end(), std::greater<>());
    shapes.insert(g);
  }
  CHECK(shapes.size() == 5);
  CHECK(shapes.count({81, 1, 1, 1}) == 1);
  CHECK(shapes.count({27, 3, 1, 1}) == 1);
  CHECK(shapes.count({9, 9, 1, 1}) == 1);
  CHECK(shapes.count({9, 3, 3, 1}) == 1);
  CHECK(shapes.count({3, 3, 3, 3}) == 1);
}

TEST_CASE("cost estimates follow the leading-order model") {
  SUBCASE("cubical three-way case") {
    std::vector<std::uint64_t> dims{64, 64, 64};
    std::vector<std::uint64_t> grid{4, 4, 4};
    auto est = estimate_costs(dims, grid, 8);
    CHECK(est.compute_flops_tree == doctest::Approx(64.0 * 64 * 64 * 8 / 64.0));
    CHECK(est.compute_flops_flat == doctest::Approx(3.0 * 64 * 64 * 64 * 8 / 64.0));
    CHECK(est.comm_words == doctest::Approx(3.0 * 8 * 16));
    CHECK(est.memory_replica_words == doctest::Approx(3.0 * 8 * 16));
    CHECK(est.mttkrp_temp_words_tree == doctest::Approx(8.0 * std::sqrt(64.0 * 64 * 64 / 64.0)));
    // flat temporary: R * (I / In) / (P / Pn) = 8 * 4096 / 16
    CHECK(est.mttkrp_temp_words_flat == doctest::Approx(8.0 * 4096 / 16));
  }
  SUBCASE("four-way flat-to-tree compute ratio is the order") {
    std::vector<std::uint64_t> dims{32, 32, 32, 32};
    std::vector<std::uint64_t> grid{2, 2, 2, 2};
    auto est = estimate_costs(dims, grid, 4);
    CHECK(est.compute_flops_flat / est.compute_flops_tree == doctest::Approx(4.0));
    CHECK(est.compute_flops_tree <= est.compute_flops_flat);
  }
  SUBCASE("estimates are linear in the rank") {
    std::vector<std::uint64_t> dims{24, 30, 18};
    std::vector<std::uint64_t> grid{2, 3, 1};
    auto a = estimate_costs(dims, grid, 5);
    auto b = estimate_costs(dims, grid, 10);
    CHECK(b.compute_flops_tree == doctest::Approx(2 * a.compute_flops_tree));
    CHECK(b.comm_words == doctest::Approx(2 * a.comm_words));
    CHECK(b.memory_replica_words == doctest::Approx(2 * a.memory_replica_words));
    CHECK(b.mttkrp_temp_words_tree == doctest::Approx(2 * a.mttkrp_temp_words_tree));
  }
}

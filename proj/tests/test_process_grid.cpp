#include <doctest.h>

#include <stdexcept>

#include "tenkit/par/process_grid.hpp"

using tenkit::par::ProcessGrid;

TEST_CASE("3x3x3 grid slices") {
  ProcessGrid g({3, 3, 3});
  CHECK(g.size() == 27);
  // worker at coordinate (0, 2, 0): its mode-2 slice is the 9 workers whose
  // second coordinate is 2.
  const std::uint64_t coord[] = {0, 2, 0};
  const int rank = g.rank_of(coord);
  auto slice = g.slice_ranks(2, 2);
  REQUIRE(slice.size() == 9);
  bool found = false;
  for (int r : slice) {
    CHECK(g.coord_of(r)[1] == 2);
    if (r == rank) found = true;
  }
  CHECK(found);
}

TEST_CASE("degenerate single-worker grid") {
  ProcessGrid g({1, 1, 1});
  CHECK(g.size() == 1);
  CHECK(g.slice_ranks(1, 0).size() == 1);
  CHECK(g.coord_of(0) == std::vector<std::uint64_t>{0, 0, 0});
}

TEST_CASE("4x2 grid slice sizes") {
  ProcessGrid g({4, 2});
  CHECK(g.size() == 8);
  for (std::uint64_t c = 0; c < 4; ++c) CHECK(g.slice_ranks(1, c).size() == 2);
  for (std::uint64_t c = 0; c < 2; ++c) CHECK(g.slice_ranks(2, c).size() == 4);
}

TEST_CASE("rank and coordinate round-trip") {
  ProcessGrid g({2, 3, 2});
  for (int r = 0; r < g.size(); ++r) {
    auto c = g.coord_of(r);
    CHECK(g.rank_of(c) == r);
  }
  // column-major rank order: first coordinate varies fastest
  const std::uint64_t second[] = {1, 0, 0};
  CHECK(g.rank_of(second) == 1);
  const std::uint64_t third[] = {0, 1, 0};
  CHECK(g.rank_of(third) == 2);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(ProcessGrid({2, 0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(ProcessGrid({}), std::invalid_argument);
  ProcessGrid g({2, 2});
  CHECK_THROWS_AS(g.coord_of(4), std::out_of_range);
  CHECK_THROWS_AS(g.slice_ranks(3, 0), std::invalid_argument);
  CHECK_THROWS_AS(g.slice_ranks(1, 2), std::out_of_range);
}

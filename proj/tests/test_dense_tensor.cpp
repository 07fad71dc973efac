#include <doctest.h>

#include <stdexcept>

#include <numeric>
#include <random>

#include "helpers.hpp"
#include "tenkit/dense_tensor.hpp"

using tenkit::DenseTensor;

TEST_CASE("entry offsets in generalized column-major order") {
  DenseTensor t({2, 3, 4});
  const std::uint64_t i0[] = {1, 1, 1};
  CHECK(t.offset_of(i0) == 0);
  const std::uint64_t i1[] = {2, 1, 1};
  CHECK(t.offset_of(i1) == 1);
  const std::uint64_t i2[] = {1, 2, 3};
  CHECK(t.offset_of(i2) == 14);  // 0 + 1*2 + 2*6
}

TEST_CASE("offset errors") {
  DenseTensor t({2, 3});
  const std::uint64_t bad1[] = {0, 1};
  CHECK_THROWS_AS(t.offset_of(bad1), std::out_of_range);
  const std::uint64_t bad2[] = {1, 4};
  CHECK_THROWS_AS(t.offset_of(bad2), std::out_of_range);
  const std::uint64_t bad3[] = {1, 1, 1};
  CHECK_THROWS_AS(t.offset_of(bad3), std::invalid_argument);
}

TEST_CASE("offset and index round-trip exhaustively") {
  for (const auto& dims : {std::vector<std::uint64_t>{2, 3, 4}, {3, 1, 2}, {5}, {2, 2, 2, 2}}) {
    DenseTensor t(dims);
    for (std::uint64_t off = 0; off < t.numel(); ++off) {
      const auto idx = t.index_of(off);
      CHECK(t.offset_of(idx) == off);
    }
  }
}

TEST_CASE("construction validation") {
  CHECK_THROWS_AS(DenseTensor({2, 0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(DenseTensor(std::vector<std::uint64_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(DenseTensor({2, 2}, std::vector<double>(3)), std::invalid_argument);
  CHECK_THROWS_AS(tenkit::checked_numel(std::vector<std::uint64_t>{1ull << 40, 1ull << 40}),
                  std::invalid_argument);
}

TEST_CASE("norm_squared") {
  DenseTensor z({2, 2});
  CHECK(z.norm_squared() == 0.0);

  DenseTensor ones({2, 2, 2});
  for (std::uint64_t i = 0; i < 8; ++i) ones[i] = 1.0;
  CHECK(ones.norm_squared() == 8.0);

  DenseTensor seq({2, 2, 2});
  for (std::uint64_t i = 0; i < 8; ++i) seq[i] = static_cast<double>(i + 1);
  CHECK(seq.norm_squared() == 204.0);
}

TEST_CASE("mode_n_matricize reference cases") {
  SUBCASE("a matrix in mode 1 is itself") {
    DenseTensor t({2, 2}, {1, 2, 3, 4});
    auto m = tenkit::mode_n_matricize(t, 1);
    CHECK(m(0, 0) == 1);
    CHECK(m(1, 0) == 2);
    CHECK(m(0, 1) == 3);
    CHECK(m(1, 1) == 4);
  }
  SUBCASE("2x2x2 with entries 1..8, mode 2") {
    DenseTensor t({2, 2, 2});
    for (std::uint64_t i = 0; i < 8; ++i) t[i] = static_cast<double>(i + 1);
    auto m = tenkit::mode_n_matricize(t, 2);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 4);
    const double row0[] = {1, 2, 5, 6};
    const double row1[] = {3, 4, 7, 8};
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(m(0, j) == row0[j]);
      CHECK(m(1, j) == row1[j]);
    }
  }
  SUBCASE("all-ones 3x4x5, mode 3") {
    DenseTensor t({3, 4, 5});
    for (std::uint64_t i = 0; i < t.numel(); ++i) t[i] = 1.0;
    auto m = tenkit::mode_n_matricize(t, 3);
    REQUIRE(m.rows() == 5);
    REQUIRE(m.cols() == 12);
    for (double v : m.span()) CHECK(v == 1.0);
  }
  SUBCASE("invalid mode") {
    DenseTensor t({2, 2});
    CHECK_THROWS_AS(tenkit::mode_n_matricize(t, 0), std::invalid_argument);
    CHECK_THROWS_AS(tenkit::mode_n_matricize(t, 3), std::invalid_argument);
  }
}

TEST_CASE("mode_n_matricize columns are mode-n fibers") {
  std::mt19937_64 rng(5);
  auto t = testutil::random_tensor({3, 4, 2, 3}, rng);
  for (std::size_t mode = 1; mode <= 4; ++mode) {
    auto m = tenkit::mode_n_matricize(t, mode);
    // Rebuild each column by enumerating the remaining modes in increasing
    // order, lowest fastest, and compare entry by entry.
    std::vector<std::uint64_t> rest;
    for (std::size_t n = 1; n <= 4; ++n)
      if (n != mode) rest.push_back(t.dims()[n - 1]);
    std::uint64_t cols = m.cols();
    for (std::uint64_t j = 0; j < cols; ++j) {
      std::uint64_t rem = j;
      std::vector<std::uint64_t> idx(4);
      std::size_t k = 0;
      for (std::size_t n = 1; n <= 4; ++n) {
        if (n == mode) continue;
        idx[n - 1] = rem % rest[k] + 1;
        rem /= rest[k];
        ++k;
      }
      for (std::uint64_t i = 1; i <= t.dims()[mode - 1]; ++i) {
        idx[mode - 1] = i;
        CHECK(m(i - 1, j) == t.at(idx));
      }
    }
  }
}

TEST_CASE("split view aliases the tensor without copying") {
  std::mt19937_64 rng(9);
  auto t = testutil::random_tensor({4, 3, 4, 2}, rng);
  for (std::size_t s = 1; s < 4; ++s) {
    tenkit::SplitView view(t, s);
    std::uint64_t rows = 1, cols = 1;
    for (std::size_t n = 0; n < 4; ++n) (n < s ? rows : cols) *= t.dims()[n];
    REQUIRE(view.rows() == rows);
    REQUIRE(view.cols() == cols);
    CHECK(view.data() == t.data());
    for (std::uint64_t c = 0; c < cols; ++c) {
      for (std::uint64_t r = 0; r < rows; ++r) {
        // Decode (r, c) into the tensor multi-index by definition.
        std::vector<std::uint64_t> idx(4);
        std::uint64_t rem = r;
        for (std::size_t n = 0; n < s; ++n) {
          idx[n] = rem % t.dims()[n] + 1;
          rem /= t.dims()[n];
        }
        rem = c;
        for (std::size_t n = s; n < 4; ++n) {
          idx[n] = rem % t.dims()[n] + 1;
          rem /= t.dims()[n];
        }
        CHECK(view(r, c) == t.at(idx));
      }
    }
  }
  CHECK_THROWS_AS(tenkit::SplitView(t, 0), std::invalid_argument);
  CHECK_THROWS_AS(tenkit::SplitView(t, 4), std::invalid_argument);
}

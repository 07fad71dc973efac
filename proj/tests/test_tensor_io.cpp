#include <doctest.h>

#include <stdexcept>

#include <cstring>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "tenkit/tensor_io.hpp"

TEST_CASE("tensor file round-trips bitwise") {
  std::mt19937_64 rng(21);
  auto t = testutil::random_tensor({3, 5, 2}, rng, -2.0, 2.0);
  std::stringstream ss;
  tenkit::write_tensor(ss, t);
  auto back = tenkit::read_tensor(ss);
  CHECK(back == t);
}

TEST_CASE("tensor file header layout") {
  tenkit::DenseTensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  std::stringstream ss;
  tenkit::write_tensor(ss, t);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 8 + 8 + 2 * 8 + 6 * 8);
  CHECK(std::memcmp(bytes.data(), "DTEN0001", 8) == 0);
  // u64 little-endian mode count, then the extents
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);
  for (int i = 9; i < 16; ++i) CHECK(bytes[i] == 0);
  CHECK(static_cast<unsigned char>(bytes[16]) == 2);
  CHECK(static_cast<unsigned char>(bytes[24]) == 3);
  double first;
  std::memcpy(&first, bytes.data() + 32, 8);
  CHECK(first == 1.0);
}

TEST_CASE("tensor file error paths") {
  std::stringstream bad("XXXX0001 not a tensor");
  CHECK_THROWS_AS(tenkit::read_tensor(bad), std::runtime_error);

  tenkit::DenseTensor t({2, 2}, {1, 2, 3, 4});
  std::stringstream ss;
  tenkit::write_tensor(ss, t);
  std::string truncated = ss.str().substr(0, 40);
  std::stringstream ts(truncated);
  CHECK_THROWS_AS(tenkit::read_tensor(ts), std::runtime_error);
}

TEST_CASE("model file round-trips bitwise") {
  std::mt19937_64 rng(22);
  tenkit::KruskalModel m;
  m.factors.push_back(testutil::random_matrix(4, 3, rng));
  m.factors.push_back(testutil::random_matrix(5, 3, rng));
  m.factors.push_back(testutil::random_matrix(2, 3, rng));
  m.lambda = {0.5, 1.25, 3.0};
  std::stringstream ss;
  tenkit::write_model(ss, m);
  auto back = tenkit::read_model(ss);
  CHECK(back == m);
}

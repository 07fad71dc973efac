#include <doctest.h>

#include <stdexcept>

#include <random>

#include "helpers.hpp"
#include "tenkit/mttkrp.hpp"

using tenkit::DenseTensor;
using tenkit::FlopLedger;
using tenkit::Matrix;

namespace {

std::vector<const Matrix*> ptrs(const std::vector<Matrix>& ms) {
  std::vector<const Matrix*> p;
  for (const auto& m : ms) p.push_back(&m);
  return p;
}

}  // namespace

TEST_CASE("mttkrp_naive on all-ones data") {
  DenseTensor t({2, 2, 2});
  for (std::uint64_t i = 0; i < 8; ++i) t[i] = 1.0;
  std::vector<Matrix> f(3, Matrix(2, 1));
  for (auto& m : f) m.fill(1.0);
  Matrix m1 = tenkit::mttkrp_naive(t, ptrs(f), 1);
  CHECK(m1(0, 0) == 4.0);
  CHECK(m1(1, 0) == 4.0);
}

TEST_CASE("mttkrp_naive rank-1 identity") {
  // For a rank-1 tensor x o y o z with factors (y, z): M(1) = x (y'y)(z'z).
  std::mt19937_64 rng(31);
  Matrix x = testutil::random_matrix(4, 1, rng);
  Matrix y = testutil::random_matrix(3, 1, rng);
  Matrix z = testutil::random_matrix(5, 1, rng);
  tenkit::KruskalModel model;
  model.factors = {x, y, z};
  model.lambda = {1.0};
  DenseTensor t = testutil::expand_by_definition(model);

  std::vector<Matrix> f = {Matrix(4, 1), y, z};
  Matrix m1 = tenkit::mttkrp_naive(t, ptrs(f), 1);
  double yty = 0, ztz = 0;
  for (double v : y.span()) yty += v * v;
  for (double v : z.span()) ztz += v * v;
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(m1(i, 0) == doctest::Approx(x(i, 0) * yty * ztz).epsilon(1e-12));
}

TEST_CASE("mttkrp_naive zero factor gives zero result") {
  std::mt19937_64 rng(32);
  auto t = testutil::random_tensor({3, 4, 2}, rng);
  std::vector<Matrix> f = {Matrix(3, 2), testutil::random_matrix(4, 2, rng), Matrix(2, 2)};
  Matrix m1 = tenkit::mttkrp_naive(t, ptrs(f), 1);
  for (double v : m1.span()) CHECK(v == 0.0);
}

TEST_CASE("mttkrp_naive matches the definitional loop") {
  std::mt19937_64 rng(33);
  for (const auto& dims :
       {std::vector<std::uint64_t>{3, 4, 5}, {2, 3, 2, 4}, {5, 2}, {2, 2, 3, 2, 2}}) {
    auto t = testutil::random_tensor(dims, rng);
    std::vector<Matrix> f;
    for (auto d : dims) f.push_back(testutil::random_matrix(d, 3, rng));
    auto fp = ptrs(f);
    for (std::size_t n = 1; n <= dims.size(); ++n) {
      Matrix got = tenkit::mttkrp_naive(t, fp, n);
      Matrix want = testutil::mttkrp_by_definition(t, fp, n);
      CHECK(testutil::rel_frobenius_gap(got, want) < 1e-13);
    }
  }
}

TEST_CASE("mttkrp_naive validates shapes") {
  DenseTensor t({2, 3});
  std::vector<Matrix> f = {Matrix(2, 2), Matrix(4, 2)};  // wrong rows in mode 2
  CHECK_THROWS_AS(tenkit::mttkrp_naive(t, ptrs(f), 1), std::invalid_argument);
}

TEST_CASE("partial_mttkrp contracts one contiguous side") {
  SUBCASE("three-way, keep the left side") {
    std::mt19937_64 rng(41);
    auto t = testutil::random_tensor({3, 4, 5}, rng);
    Matrix w = testutil::random_matrix(5, 2, rng);
    DenseTensor temp = tenkit::partial_mttkrp(t, w, 2, tenkit::KeepSide::left);
    REQUIRE(temp.dims().size() == 3);
    CHECK(temp.dims()[0] == 3);
    CHECK(temp.dims()[1] == 4);
    CHECK(temp.dims()[2] == 2);
    for (std::uint64_t i = 1; i <= 3; ++i)
      for (std::uint64_t j = 1; j <= 4; ++j)
        for (std::uint64_t r = 1; r <= 2; ++r) {
          double s = 0.0;
          for (std::uint64_t k = 1; k <= 5; ++k) {
            const std::uint64_t idx[] = {i, j, k};
            s += t.at(idx) * w(k - 1, r - 1);
          }
          const std::uint64_t oidx[] = {i, j, r};
          CHECK(temp.at(oidx) == doctest::Approx(s).epsilon(1e-13));
        }
  }
  SUBCASE("all-ones cube against an all-ones vector") {
    DenseTensor t({2, 2, 2});
    for (std::uint64_t i = 0; i < 8; ++i) t[i] = 1.0;
    Matrix w(2, 1);
    w.fill(1.0);
    DenseTensor temp = tenkit::partial_mttkrp(t, w, 2, tenkit::KeepSide::left);
    for (std::uint64_t i = 0; i < temp.numel(); ++i) CHECK(temp[i] == 2.0);
  }
  SUBCASE("singleton keep side reproduces the full MTTKRP bitwise") {
    std::mt19937_64 rng(42);
    auto t = testutil::random_tensor({3, 4, 5}, rng);
    std::vector<Matrix> f = {Matrix(3, 2), testutil::random_matrix(4, 2, rng),
                             testutil::random_matrix(5, 2, rng)};
    auto fp = ptrs(f);
    Matrix krp = tenkit::krp_of_modes(fp, 2, 3);
    DenseTensor temp = tenkit::partial_mttkrp(t, krp, 1, tenkit::KeepSide::left);
    Matrix naive = tenkit::mttkrp_naive(t, fp, 1);
    REQUIRE(temp.numel() == naive.size());
    for (std::uint64_t i = 0; i < temp.numel(); ++i) CHECK(temp[i] == naive.data()[i]);
  }
  SUBCASE("krp row mismatch") {
    DenseTensor t({2, 3, 4});
    Matrix w(5, 1);
    CHECK_THROWS_AS(tenkit::partial_mttkrp(t, w, 1, tenkit::KeepSide::left),
                    std::invalid_argument);
  }
}

TEST_CASE("multi_ttv contracts against per-column vectors") {
  SUBCASE("keep the lead mode of an I x J x R temporary") {
    std::mt19937_64 rng(51);
    auto temp = testutil::random_tensor({3, 4, 2}, rng);  // rank mode last
    Matrix v = testutil::random_matrix(4, 2, rng);
    DenseTensor out = tenkit::multi_ttv(temp, v, tenkit::MttvTarget::keep_lead_mode);
    REQUIRE(out.dims()[0] == 3);
    REQUIRE(out.dims()[1] == 2);
    for (std::uint64_t i = 1; i <= 3; ++i)
      for (std::uint64_t r = 1; r <= 2; ++r) {
        double s = 0.0;
        for (std::uint64_t j = 1; j <= 4; ++j) {
          const std::uint64_t idx[] = {i, j, r};
          s += v(j - 1, r - 1) * temp.at(idx);
        }
        const std::uint64_t oidx[] = {i, r};
        CHECK(out.at(oidx) == doctest::Approx(s).epsilon(1e-13));
      }
  }
  SUBCASE("all-ones 2x3x1 against ones") {
    DenseTensor temp({2, 3, 1});
    for (std::uint64_t i = 0; i < 6; ++i) temp[i] = 1.0;
    Matrix v(3, 1);
    v.fill(1.0);
    DenseTensor out = tenkit::multi_ttv(temp, v, tenkit::MttvTarget::keep_lead_mode);
    CHECK(out[0] == 3.0);
    CHECK(out[1] == 3.0);
  }
  SUBCASE("contract two trailing modes of a 4-way temporary") {
    std::mt19937_64 rng(52);
    auto temp = testutil::random_tensor({2, 2, 2, 2}, rng);  // modes (1,2,3) + rank
    Matrix f2 = testutil::random_matrix(2, 2, rng);
    Matrix f3 = testutil::random_matrix(2, 2, rng);
    const Matrix* list[] = {&f2, &f3};
    Matrix krp = tenkit::khatri_rao(std::span<const Matrix* const>(list, 2));
    DenseTensor out = tenkit::multi_ttv(temp, krp, tenkit::MttvTarget::keep_lead_mode);
    for (std::uint64_t i = 1; i <= 2; ++i)
      for (std::uint64_t r = 1; r <= 2; ++r) {
        double s = 0.0;
        for (std::uint64_t a = 1; a <= 2; ++a)
          for (std::uint64_t b = 1; b <= 2; ++b) {
            const std::uint64_t idx[] = {i, a, b, r};
            s += temp.at(idx) * f2(a - 1, r - 1) * f3(b - 1, r - 1);
          }
        const std::uint64_t oidx[] = {i, r};
        CHECK(out.at(oidx) == doctest::Approx(s).epsilon(1e-13));
      }
  }
  SUBCASE("drop the lead mode") {
    std::mt19937_64 rng(53);
    auto temp = testutil::random_tensor({3, 4, 2}, rng);
    Matrix u = testutil::random_matrix(3, 2, rng);
    DenseTensor out = tenkit::multi_ttv(temp, u, tenkit::MttvTarget::drop_lead_mode);
    REQUIRE(out.dims()[0] == 4);
    REQUIRE(out.dims()[1] == 2);
    for (std::uint64_t j = 1; j <= 4; ++j)
      for (std::uint64_t r = 1; r <= 2; ++r) {
        double s = 0.0;
        for (std::uint64_t i = 1; i <= 3; ++i) {
          const std::uint64_t idx[] = {i, j, r};
          s += u(i - 1, r - 1) * temp.at(idx);
        }
        const std::uint64_t oidx[] = {j, r};
        CHECK(out.at(oidx) == doctest::Approx(s).epsilon(1e-13));
      }
  }
  SUBCASE("dimension mismatch") {
    DenseTensor temp({3, 4, 2});
    Matrix bad(5, 2);
    CHECK_THROWS_AS(tenkit::multi_ttv(temp, bad, tenkit::MttvTarget::keep_lead_mode),
                    std::invalid_argument);
  }
}

TEST_CASE("flop ledger accounting") {
  std::mt19937_64 rng(61);
  auto t = testutil::random_tensor({3, 4, 5}, rng);
  std::vector<Matrix> f;
  for (auto d : t.dims()) f.push_back(testutil::random_matrix(d, 2, rng));
  auto fp = ptrs(f);

  FlopLedger ledger;
  Matrix krp = tenkit::krp_of_modes(fp, 2, 3, &ledger);
  CHECK(ledger.krp == 4ull * 5 * 2);  // one fold of 4-row and 5-row inputs

  tenkit::partial_mttkrp(t, krp, 1, tenkit::KeepSide::left, &ledger);
  CHECK(ledger.partial_mttkrp == 2ull * 60 * 2);

  auto temp = testutil::random_tensor({3, 4, 2}, rng);
  tenkit::multi_ttv(temp, f[1], tenkit::MttvTarget::keep_lead_mode, &ledger);
  CHECK(ledger.multi_ttv == 2ull * 12 * 2);

  tenkit::mttkrp_naive(t, fp, 1, &ledger);
  CHECK(ledger.full_mttkrp == 2ull * 60 * 2);

  const auto before = ledger;
  ledger.reset();
  CHECK(ledger.total() == 0);
  CHECK(before.total() > 0);
}

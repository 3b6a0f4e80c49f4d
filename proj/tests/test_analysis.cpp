#include <catch_amalgamated.hpp>

#include <cmath>

#include <csi2dig/analysis.hpp>
#include <csi2dig/preprocess.hpp>
#include <csi2dig/rng.hpp>

#include "oracles.hpp"

using namespace csi2dig;

TEST_CASE("pearson on exact linear relations") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == Catch::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson({1, 2, 3, 4}, {1, 3, 2, 4}) == Catch::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("pearson conventions and errors") {
  CHECK(pearson({5, 5, 5}, {1, 2, 3}) == 0.0);
  CHECK_THROWS_MATCHES(pearson({1, 2}, {1, 2, 3}), CsiError,
                       Catch::Matchers::Predicate<CsiError>(
                           [](const CsiError& e) { return e.code() == Errc::length_mismatch; }));
  CHECK_THROWS_MATCHES(pearson({1.0}, {2.0}), CsiError,
                       Catch::Matchers::Predicate<CsiError>(
                           [](const CsiError& e) { return e.code() == Errc::too_short; }));
}

TEST_CASE("temporal matrix base cases") {
  Sample s(4, 2);
  s.values = {1, 1, 2, 2, 3, 3, 4, 4};  // identical columns
  auto m = temporal_corr_matrix(s);
  CHECK(m.at(0, 1) == Catch::Approx(1.0).epsilon(1e-12));

  Sample neg(3, 2);
  neg.values = {1, -1, 2, -2, 3, -3};
  CHECK(temporal_corr_matrix(neg).at(0, 1) == Catch::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("spatial matrix base cases") {
  Sample dup(2, 4);
  dup.values = {1, 2, 3, 4, 1, 2, 3, 4};
  CHECK(spatial_corr_matrix(dup).at(0, 1) == Catch::Approx(1.0).epsilon(1e-12));

  Sample two(2, 5);
  Rng rng(3);
  for (double& v : two.values) v = rng.uniform(-1, 1);
  auto m = spatial_corr_matrix(two);
  std::vector<double> r0(two.values.begin(), two.values.begin() + 5);
  std::vector<double> r1(two.values.begin() + 5, two.values.end());
  CHECK(m.at(0, 1) == Catch::Approx(pearson(r0, r1)).epsilon(1e-12));
}

TEST_CASE("correlation matrices match the brute-force oracle") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    size_t rows = 3 + rng.uniform_int(10);
    size_t cols = 2 + rng.uniform_int(8);
    Sample s = oracles::random_sample(rows, cols, rng);

    auto mt = temporal_corr_matrix(s);
    REQUIRE(mt.dim == cols);
    for (size_t i = 0; i < cols; ++i)
      for (size_t j = 0; j < cols; ++j) {
        std::vector<double> ci(rows), cj(rows);
        for (size_t r = 0; r < rows; ++r) {
          ci[r] = s.at(r, i);
          cj[r] = s.at(r, j);
        }
        double expect = i == j ? 1.0 : oracles::pearson_naive(ci, cj);
        CHECK(std::abs(mt.at(i, j) - expect) < 1e-12);
        CHECK(mt.at(i, j) == mt.at(j, i));
        CHECK(mt.at(i, j) <= 1.0 + 1e-9);
        CHECK(mt.at(i, j) >= -1.0 - 1e-9);
      }

    auto ms = spatial_corr_matrix(s);
    REQUIRE(ms.dim == rows);
    for (size_t i = 0; i < rows; ++i) {
      CHECK(ms.at(i, i) == 1.0);
      for (size_t j = i + 1; j < rows; ++j) {
        std::vector<double> ri(cols), rj(cols);
        for (size_t c = 0; c < cols; ++c) {
          ri[c] = s.at(i, c);
          rj[c] = s.at(j, c);
        }
        CHECK(std::abs(ms.at(i, j) - oracles::pearson_naive(ri, rj)) < 1e-12);
      }
    }
  }
}

TEST_CASE("column_mean_profile excludes the diagonal") {
  CorrelationMatrix all_ones;
  all_ones.dim = 3;
  all_ones.values.assign(9, 1.0);
  auto p = column_mean_profile(all_ones);
  CHECK(p == std::vector<double>{1.0, 1.0, 1.0});

  CorrelationMatrix m2;
  m2.dim = 2;
  m2.values = {1.0, 0.5, 0.5, 1.0};
  CHECK(column_mean_profile(m2) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("cross_mean_pcc base cases") {
  std::vector<std::vector<double>> single = {{1, 2, 3}};
  CHECK(cross_mean_pcc(single, single) == Catch::Approx(1.0).epsilon(1e-12));

  // rows of B constructed orthogonal (in deviation) to the row of A:
  // dev([1,2,3]) = [-1,0,1]; dev([0,1,0]) and dev([1,3,1]) are multiples of
  // [-1,2,-1], orthogonal to it.
  std::vector<std::vector<double>> a = {{1, 2, 3}};
  std::vector<std::vector<double>> b = {{0, 1, 0}, {1, 3, 1}};
  CHECK(cross_mean_pcc(a, b) == Catch::Approx(0.0).margin(1e-12));

  CHECK_THROWS_MATCHES(cross_mean_pcc(a, {{1, 2}}), CsiError,
                       Catch::Matchers::Predicate<CsiError>(
                           [](const CsiError& e) { return e.code() == Errc::width_mismatch; }));
}

TEST_CASE("cross_mean_pcc equals the exhaustive double loop") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    size_t n1 = 2 + rng.uniform_int(6), n2 = 2 + rng.uniform_int(7);
    size_t w = 3 + rng.uniform_int(8);
    std::vector<std::vector<double>> a(n1, std::vector<double>(w)), b(n2, std::vector<double>(w));
    for (auto& row : a)
      for (double& v : row) v = rng.uniform(-1, 1);
    for (auto& row : b)
      for (double& v : row) v = rng.uniform(-1, 1);

    double sum = 0;
    for (const auto& ra : a)
      for (const auto& rb : b) sum += oracles::pearson_naive(ra, rb);
    double expect = sum / static_cast<double>(n1 * n2);
    CHECK(std::abs(cross_mean_pcc(a, b) - expect) < 1e-12);
  }
}

TEST_CASE("cross_mean_pcc of a set with itself bounds the minimum pair") {
  Rng rng(47);
  std::vector<std::vector<double>> a(4, std::vector<double>(6));
  for (auto& row : a)
    for (double& v : row) v = rng.uniform(-1, 1);
  double min_pair = 1.0;
  for (const auto& ra : a)
    for (const auto& rb : a) min_pair = std::min(min_pair, pearson(ra, rb));
  CHECK(cross_mean_pcc(a, a) >= min_pair);
}

TEST_CASE("dtw_distance of a sample with itself is zero") {
  Rng rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    Sample s = oracles::random_sample(2 + rng.uniform_int(12), 1 + rng.uniform_int(5), rng);
    CHECK(dtw_distance(s, s) == 0.0);
  }
}

TEST_CASE("dtw alignment absorbs duplicated points") {
  Sample a(3, 1), b(4, 1);
  a.values = {1, 2, 3};
  b.values = {1, 2, 2, 3};
  CHECK(dtw_distance(a, b) == 0.0);
}

TEST_CASE("dtw_distance equals exhaustive path enumeration on short columns") {
  Rng rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 2 + rng.uniform_int(5), m = 2 + rng.uniform_int(5);
    Sample a = oracles::random_sample(n, 1, rng), b = oracles::random_sample(m, 1, rng);
    double expect = oracles::dtw_enum(std::span<const double>(a.values),
                                      std::span<const double>(b.values));
    CHECK(std::abs(dtw_distance(a, b) - expect) < 1e-12);
  }
}

TEST_CASE("dtw_distance is symmetric and non-negative") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    Sample a = oracles::random_sample(4 + rng.uniform_int(8), 3, rng);
    Sample b = oracles::random_sample(4 + rng.uniform_int(8), 3, rng);
    double ab = dtw_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == dtw_distance(b, a));
  }
  Sample a(2, 2), b(2, 3);
  CHECK_THROWS_MATCHES(dtw_distance(a, b), CsiError,
                       Catch::Matchers::Predicate<CsiError>(
                           [](const CsiError& e) { return e.code() == Errc::width_mismatch; }));
}

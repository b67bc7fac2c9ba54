#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vinegc/marginal.hpp"

using namespace vinegc;

TEST_CASE("pit follows the T+1 counting formula") {
  const std::vector<double> x = {3, 1, 4, 2};
  const EmpiricalMarginal m(x);
  CHECK(m.pit(2.0) == doctest::Approx(2.0 / 5.0));
  CHECK(m.pit(10.0) == doctest::Approx(4.0 / 5.0));
  CHECK(m.pit(0.0) == doctest::Approx(1e-10));  // empty count, clamped
}

TEST_CASE("quantile interpolates the inverse step function") {
  const std::vector<double> x = {1, 2, 3, 4};
  const EmpiricalMarginal m(x);
  CHECK(m.quantile(2.0 / 5.0) == doctest::Approx(2.0));
  CHECK(m.quantile(0.5) == doctest::Approx(2.5));
  // clamps at the extreme order statistics
  CHECK(m.quantile(1e-12) == doctest::Approx(1.0));
  CHECK(m.quantile(1.0 - 1e-12) == doctest::Approx(4.0));
}

TEST_CASE("quantile(pit(x)) recovers distinct sample points") {
  const std::vector<double> x = {0.3, -1.2, 5.4, 2.2, 0.9, -4.0};
  const EmpiricalMarginal m(x);
  for (double v : x) {
    CHECK(m.quantile(m.pit(v)) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("pit of the sample is the rank grid for distinct values") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> x;
  for (int i = 0; i < 25; ++i) x.push_back(normal(rng));
  const EmpiricalMarginal m(x);
  std::vector<double> pits;
  for (double v : x) pits.push_back(m.pit(v));
  std::sort(pits.begin(), pits.end());
  for (int i = 0; i < 25; ++i) {
    CHECK(pits[i] == doctest::Approx((i + 1) / 26.0).epsilon(1e-12));
  }
}

TEST_CASE("pit and quantile are nondecreasing") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  std::vector<double> x;
  for (int i = 0; i < 40; ++i) x.push_back(normal(rng));
  const EmpiricalMarginal m(x);
  double prev = -1.0;
  for (double q = -3.0; q <= 3.0; q += 0.05) {
    const double p = m.pit(q);
    CHECK(p >= prev);
    prev = p;
  }
  prev = -1e300;
  for (double u = 0.01; u < 1.0; u += 0.01) {
    const double v = m.quantile(u);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("tied sample points share a pseudo-observation") {
  const std::vector<double> x = {1, 2, 2, 3};
  const EmpiricalMarginal m(x);
  CHECK(m.pit(2.0) == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(EmpiricalMarginal(std::vector<double>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      EmpiricalMarginal(std::vector<double>{1.0, std::nan("")}),
      std::invalid_argument);
}

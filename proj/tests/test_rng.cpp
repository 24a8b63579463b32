#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "psym/rng.hpp"

using namespace psym;

TEST_CASE("same seed reproduces the stream bit for bit") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  RandomStream a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  REQUIRE(same == 0);
}

TEST_CASE("uniform stays inside its range") {
  RandomStream rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform(-2.0, 2.0);
    REQUIRE(u >= -2.0);
    REQUIRE(u < 2.0);
  }
}

TEST_CASE("normal moments are plausible") {
  RandomStream rng(123);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(std::fabs(mean) < 0.02);
  REQUIRE(std::fabs(var - 1.0) < 0.02);
}

#include <doctest.h>

#include <cmath>

#include "invartest/rng.hpp"

using invartest::SplitMix64;

TEST_SUITE("rng") {

TEST_CASE("splitmix64 reproduces the published sequence from seed 0") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xe220a8397b1dcdafull);
  CHECK(rng.next() == 0x6e789e6aa1b965f4ull);
  CHECK(rng.next() == 0x06c45d188009454full);
}

TEST_CASE("substreams are deterministic and distinct") {
  SplitMix64 a = SplitMix64::substream(42, 7);
  SplitMix64 b = SplitMix64::substream(42, 7);
  SplitMix64 c = SplitMix64::substream(42, 8);
  const std::uint64_t va = a.next();
  CHECK(va == b.next());
  CHECK(va != c.next());
  CHECK(SplitMix64::substream(43, 7).next() != va);
}

TEST_CASE("uniform doubles stay in range") {
  SplitMix64 rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.next_open01();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("gaussian moments") {
  SplitMix64 rng(123);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_gaussian();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
}

}  // TEST_SUITE

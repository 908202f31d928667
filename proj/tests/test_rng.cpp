#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "pcgeom/rng.hpp"

using namespace pcgeom;

TEST_CASE("splitmix64 reference sequence") {
  // Known values for the standard splitmix64 with seed 0 and seed 42.
  uint64_t s = 0;
  CHECK(splitmix64(s) == UINT64_C(0xe220a8397b1dcdaf));
  CHECK(splitmix64(s) == UINT64_C(0x6e789e6aa1b965f4));
  s = 42;
  CHECK(splitmix64(s) == UINT64_C(0xbdd732262feb6e95));
}

TEST_CASE("mix64 is order-sensitive and deterministic") {
  CHECK(mix64(1, 2) == mix64(1, 2));
  CHECK(mix64(1, 2) != mix64(2, 1));
  CHECK(mix64(0, 0) != 0);
}

TEST_CASE("uniform stays in [0,1) with sane mean") {
  Rng rng(123);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    sum += x;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform(a,b) respects bounds") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-2.5, 4.0);
    CHECK(x >= -2.5);
    CHECK(x < 4.0);
  }
}

TEST_CASE("normal has near-standard moments") {
  Rng rng(99);
  const int n = 50000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("uniform_int covers the full closed range") {
  Rng rng(5);
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 6000; ++i) {
    const int x = rng.uniform_int(2, 7);
    REQUIRE(x >= 2);
    REQUIRE(x <= 7);
    hits[static_cast<size_t>(x - 2)]++;
  }
  for (int h : hits) CHECK(h > 700);
}

TEST_CASE("identical seeds give identical streams") {
  Rng a(2024), b(2024);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(2025);
  bool same = true;
  Rng d(2024);
  for (int i = 0; i < 10; ++i) same = same && (c.next_u64() == d.next_u64());
  CHECK_FALSE(same);
}

TEST_CASE("shuffle permutes without loss") {
  Rng rng(1);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<size_t>(i)] = i;
  auto w = v;
  rng.shuffle(w);
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}

TEST_CASE("sample_without_replacement yields distinct sorted-checkable indices") {
  Rng rng(77);
  const auto s = rng.sample_without_replacement(50, 12);
  REQUIRE(s.size() == 12);
  auto t = s;
  std::sort(t.begin(), t.end());
  for (size_t i = 0; i + 1 < t.size(); ++i) CHECK(t[i] != t[i + 1]);
  for (int x : t) {
    CHECK(x >= 0);
    CHECK(x < 50);
  }
  // Asking for everything returns a permutation of 0..n-1.
  auto all = rng.sample_without_replacement(8, 8);
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 8; ++i) CHECK(all[static_cast<size_t>(i)] == i);
}

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "seqpgg/rng.hpp"

using namespace seqpgg;

TEST_CASE("streams are deterministic and seed-sensitive") {
  RngStream a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  bool all_equal = true;
  RngStream a2(42);
  for (int i = 0; i < 16; ++i) all_equal = all_equal && (a2.next_u64() == c.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("derived seeds differ by path and order") {
  const std::uint64_t base = 7;
  CHECK(derive_seed(base, 1, 2) != derive_seed(base, 2, 1));
  CHECK(derive_seed(base, 1) != derive_seed(base, 2));
  CHECK(derive_seed(base, 1, 0) != derive_seed(base, 1));
  CHECK(derive_seed(base, 5, 9) == derive_seed(7, 5, 9));
}

TEST_CASE("uniform doubles and bounded integers look uniform") {
  RngStream rng(2024);
  double sum = 0.0;
  const int n = 200000;
  std::vector<int> buckets(8, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    ++buckets[static_cast<int>(rng.bounded(8))];
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  for (int b : buckets)
    CHECK(std::abs(b / static_cast<double>(n) - 0.125) < 0.01);
}

TEST_CASE("shuffle is a permutation with roughly uniform first element") {
  RngStream rng(5);
  std::vector<int> counts(6, 0);
  for (int trial = 0; trial < 60000; ++trial) {
    std::vector<int> v{0, 1, 2, 3, 4, 5};
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
    ++counts[v[0]];
  }
  for (int c : counts)
    CHECK(std::abs(c / 60000.0 - 1.0 / 6.0) < 0.01);
}

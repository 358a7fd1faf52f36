#include "ergoflow/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

using namespace ergoflow;

TEST_SUITE("rng") {

TEST_CASE("philox block advances its counter") {
  Philox4x32 p;
  auto b0 = p();
  auto b1 = p();
  CHECK(b0 != b1);
  Philox4x32 q;
  CHECK(q() == b0);
}

TEST_CASE("mix64 separates nearby inputs") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(mix64(i));
  CHECK(seen.size() == 1000);
  CHECK(mix64(42) == mix64(42));
}

TEST_CASE("streams replay exactly") {
  RandomStream a(7, 13), b(7, 13);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  RandomStream c(7, 13), d(7, 13);
  for (int i = 0; i < 500; ++i) {
    CHECK(c.next_uniform() == d.next_uniform());
    CHECK(c.next_normal() == d.next_normal());
  }
  CHECK(a.master_seed() == 7);
  CHECK(a.stream_index() == 13);
}

TEST_CASE("distinct stream indices give distinct draws") {
  RandomStream a(7, 13), b(7, 14), c(8, 13);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++equal_ab;
    if (va == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniforms live in (0, 1] and fill the interval") {
  RandomStream r(123, 0);
  const int n = 200000;
  double mn = 2.0, mx = -1.0, sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = r.next_uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    mn = std::min(mn, u);
    mx = std::max(mx, u);
    sum += u;
  }
  CHECK(mn < 1e-4);
  CHECK(mx > 1.0 - 1e-4);
  // mean 1/2 +- 5 sigma, sigma = 1/sqrt(12 n)
  CHECK(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
}

TEST_CASE("normals match the first four moments") {
  RandomStream r(2024, 3);
  const int n = 400000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.next_normal();
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
    m4 += x * x * x * x;
  }
  m1 /= n; m2 /= n; m3 /= n; m4 /= n;
  double se = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(m1) < 5 * se);
  CHECK(std::abs(m2 - 1.0) < 5 * std::sqrt(2.0) * se);
  CHECK(std::abs(m3) < 5 * std::sqrt(15.0) * se);
  CHECK(std::abs(m4 - 3.0) < 5 * std::sqrt(96.0) * se);
}

TEST_CASE("scaled normal applies mean and stddev") {
  RandomStream a(5, 5), b(5, 5);
  for (int i = 0; i < 100; ++i) {
    double z = a.next_normal();
    CHECK(b.next_normal(2.0, 3.0) == doctest::Approx(2.0 + 3.0 * z).epsilon(1e-15));
  }
}

TEST_CASE("uniform draws pass a coarse equidistribution test") {
  RandomStream r(99, 17);
  const int bins = 64, n = 256000;
  std::vector<int> count(bins, 0);
  for (int i = 0; i < n; ++i) {
    int b = static_cast<int>(r.next_uniform() * bins);
    if (b == bins) b = bins - 1;
    ++count[b];
  }
  double expected = static_cast<double>(n) / bins;
  double chi2 = 0.0;
  for (int c : count) chi2 += (c - expected) * (c - expected) / expected;
  // chi2(63), far tail at ~110
  CHECK(chi2 < 110.0);
}

}  // TEST_SUITE

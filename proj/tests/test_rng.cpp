#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "crdp/rng.hpp"

using namespace crdp;

TEST_CASE("frozen output streams") {
  SplitMix64 a(0);
  CHECK(a.next() == 0xe220a8397b1dcdafULL);
  CHECK(a.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(a.next() == 0x06c45d188009454fULL);
  CHECK(a.next() == 0xf88bb8a8724c81ecULL);

  SplitMix64 b(42);
  CHECK(b.next() == 0xbdd732262feb6e95ULL);
  CHECK(b.next() == 0x28efe333b266f103ULL);
  CHECK(b.next() == 0x47526757130f9f52ULL);
  CHECK(b.next() == 0x581ce1ff0e4ae394ULL);

  CHECK(std::string(SplitMix64::name()) == "splitmix64");
}

TEST_CASE("unit draws use the top 53 bits") {
  SplitMix64 r(42);
  CHECK(r.next_unit() == doctest::Approx(0.7415648787718233).epsilon(1e-16));
  for (int i = 0; i < 1000; ++i) {
    const double u = r.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sampling inverts the cdf and consumes one draw per call") {
  const std::vector<double> row{0.3, 0.7};
  SplitMix64 r(42);
  // First unit draw is 0.7415... >= 0.3, so the second symbol comes out.
  CHECK(r.sample(row) == 1);

  // Point-mass rows still consume exactly one draw each.
  const std::vector<double> point{1.0, 0.0};
  SplitMix64 s(0);
  (void)s.sample(point);
  (void)s.sample(point);
  CHECK(s.next() == 0x06c45d188009454fULL);  // third value of the seed-0 stream

  // Zero-probability leading symbols are never selected.
  const std::vector<double> skewed{0.0, 1.0};
  SplitMix64 t(1);
  for (int i = 0; i < 50; ++i) CHECK(t.sample(skewed) == 1);
}

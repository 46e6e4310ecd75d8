#include <gtest/gtest.h>

#include <random>
#include <set>

#include "bgq/random.hpp"

namespace {

using bgq::RandomStream;

static_assert(std::uniform_random_bit_generator<RandomStream>);

TEST(RandomStream, MatchesReferenceSplitMix64) {
  RandomStream s(1234567);
  EXPECT_EQ(s(), 6457827717110365317ULL);
  EXPECT_EQ(s(), 3203168211198807973ULL);
  EXPECT_EQ(s(), 9817491932198370423ULL);

  RandomStream z(0);
  EXPECT_EQ(z(), 16294208416658607535ULL);
  EXPECT_EQ(z(), 7960286522194355700ULL);
}

TEST(RandomStream, SameSeedSameSequence) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RandomStream, UniformStaysInOpenInterval) {
  RandomStream s(7);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RandomStream, SubstreamsAreDistinctAndDoNotAdvanceParent) {
  RandomStream root(99);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    auto sub = root.substream(r);
    firsts.insert(sub());
  }
  EXPECT_EQ(firsts.size(), 1000u);
  EXPECT_EQ(root.counter(), 0u);
  EXPECT_EQ(root.substream(5).seed(), RandomStream::derive_seed(99, 5));
  EXPECT_NE(RandomStream::derive_seed(99, 5), RandomStream::derive_seed(98, 5));
}

}  // namespace

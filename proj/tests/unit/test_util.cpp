#include <atomic>
#include <set>

#include <gtest/gtest.h>

#include "surfcomp/util/base64.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/parallel.hpp"
#include "surfcomp/util/rng.hpp"

using namespace surfcomp;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, Uniform01StaysInHalfOpenRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = r.uniform01();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
}

TEST(Rng, BelowCoversRange) {
  Rng r(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = r.below(7);
    ASSERT_LT(x, 7u);
    seen.insert(x);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, DerivedSeedsDifferByKey) {
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
  EXPECT_NE(derive_seed(1, std::uint64_t{0}), derive_seed(1, std::uint64_t{1}));
  static_assert(derive_seed(5, "model") == derive_seed(5, "model"));
}

TEST(Base64, RoundTrip) {
  const std::vector<std::uint8_t> bytes{0, 1, 2, 250, 251, 255, 10};
  EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>{'M', 'a', 'n'}), "TWFu");
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>{}), "");
}

TEST(Base64, RejectsGarbage) { EXPECT_THROW(base64_decode("@@not base64@@"), PreconditionError); }

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsWorkerError) {
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 57) throw IoError("boom");
                            }),
               IoError);
}

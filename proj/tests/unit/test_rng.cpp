#include <gtest/gtest.h>

#include <cmath>

#include "kbte/parallel.hpp"
#include "kbte/rng.hpp"

using kbte::Philox4x32;
using kbte::RngStream;

TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
  const std::uint32_t f = 0xffffffffu;
  const auto out = Philox4x32::generate({f, f, f, f}, {f, f});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(RngStream, SameSeedAndStreamRepeat) {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(42, 0);
  RngStream b(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u32() == b.next_u32();
  EXPECT_LT(equal, 3);
}

TEST(RngStream, UniformRangeAndMoments) {
  RngStream rng(1, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum2 / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(RngStream, NormalMoments) {
  RngStream rng(9, 3);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.normal();
    sum += g;
    sum2 += g * g;
  }
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sum2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Parallel, PartitionCoversRangeOnce) {
  for (int workers : {1, 2, 3, 8}) {
    std::vector<int> hits(101, 0);
    kbte::parallel_for(hits.size(), workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) hits[i] += 1;
    });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Parallel, ResolveWorkers) {
  EXPECT_EQ(kbte::resolve_workers(3), 3);
  setenv("KINETIC_BTE_WORKERS", "5", 1);
  EXPECT_EQ(kbte::resolve_workers(std::nullopt), 5);
  unsetenv("KINETIC_BTE_WORKERS");
  EXPECT_EQ(kbte::resolve_workers(std::nullopt), 1);
}

#include <gtest/gtest.h>

#include <random>

#include "mgpusim/cache.hpp"
#include "oracles/lru_reference.hpp"

using namespace mgpusim;

namespace {

CacheGeometry geom(std::uint64_t kb, std::uint32_t assoc, WritePolicy p) { return {kb * 1024, assoc, 64, p}; }

}  // namespace

TEST(Cache, ColdMissThenHit) {
  Cache c(geom(16, 4, WritePolicy::WriteBack));
  EXPECT_FALSE(c.access(0x1000, AccessKind::Read).hit);
  EXPECT_TRUE(c.access(0x1000, AccessKind::Read).hit);
  EXPECT_TRUE(c.access(0x1000 + 63, AccessKind::Read).hit);  // same line
  EXPECT_FALSE(c.access(0x1000 + 64, AccessKind::Read).hit);
}

TEST(Cache, FiveConflictingLinesEvictTheFirst) {
  Cache c(geom(16, 4, WritePolicy::WriteBack));  // 64 sets
  const std::uint64_t stride = 64 * 64;          // same set
  for (std::uint64_t i = 0; i < 5; ++i) EXPECT_FALSE(c.access(i * stride, AccessKind::Read).hit);
  EXPECT_FALSE(c.access(0, AccessKind::Read).hit);
  // Re-reading line 0 evicted line 1, the least recent.
  EXPECT_FALSE(c.contains(1 * stride));
  EXPECT_TRUE(c.contains(4 * stride));
}

TEST(Cache, WriteThroughDoesNotAllocate) {
  Cache c(geom(16, 4, WritePolicy::WriteThroughNoAllocate));
  EXPECT_FALSE(c.access(0x40, AccessKind::Write).hit);
  EXPECT_FALSE(c.access(0x40, AccessKind::Write).hit);
  EXPECT_FALSE(c.contains(0x40));
  c.access(0x40, AccessKind::Read);  // read allocates
  EXPECT_TRUE(c.access(0x40, AccessKind::Write).hit);
  // Lines in a write-through cache are never dirty.
  for (std::uint64_t i = 1; i <= 4; ++i) {
    const auto r = c.access(0x40 + i * 64 * 64, AccessKind::Read);
    EXPECT_FALSE(r.evicted_dirty);
  }
}

TEST(Cache, WriteBackEvictsDirtyVictims) {
  Cache c(geom(1, 1, WritePolicy::WriteBack));  // 16 sets, direct mapped
  c.access(0, AccessKind::Write);
  const auto r = c.access(16 * 64, AccessKind::Read);
  ASSERT_TRUE(r.evicted_line.has_value());
  EXPECT_EQ(*r.evicted_line, 0u);
  EXPECT_TRUE(r.evicted_dirty);
}

TEST(Cache, MatchesBruteForceLruOnRandomAccesses) {
  struct Case {
    std::uint64_t kb;
    std::uint32_t assoc;
    WritePolicy policy;
  };
  for (const Case& k : {Case{16, 4, WritePolicy::WriteThroughNoAllocate}, Case{256, 16, WritePolicy::WriteBack},
                        Case{4, 2, WritePolicy::WriteBack}, Case{2, 32, WritePolicy::WriteThroughNoAllocate}}) {
    const CacheGeometry g = geom(k.kb, k.assoc, k.policy);
    Cache c(g);
    const bool wb = k.policy == WritePolicy::WriteBack;
    oracle::LruReference ref(g.sets(), k.assoc, wb, wb);
    std::mt19937_64 rng(k.kb * 31 + k.assoc);
    const std::uint64_t footprint_lines = g.sets() * k.assoc * 3;
    for (int i = 0; i < 10000; ++i) {
      const std::uint64_t line = rng() % footprint_lines;
      const bool write = rng() % 4 == 0;
      const auto got = c.access(line * 64 + rng() % 64, write ? AccessKind::Write : AccessKind::Read);
      const auto want = ref.access(line, write);
      ASSERT_EQ(got.hit, want.hit) << "access " << i;
      ASSERT_EQ(got.evicted_line.has_value(), want.evicted.has_value()) << "access " << i;
      if (want.evicted) {
        ASSERT_EQ(*got.evicted_line, *want.evicted * 64) << "access " << i;
        ASSERT_EQ(got.evicted_dirty, want.evicted_dirty) << "access " << i;
      }
    }
  }
}

TEST(Cache, IndexShiftSkipsBankBits) {
  CacheGeometry g = geom(1, 1, WritePolicy::WriteBack);  // 16 sets
  g.index_shift = 3;
  Cache c(g);
  // Lines 0, 8, 16, ... 120 fill all 16 sets without conflicts.
  for (std::uint64_t i = 0; i < 16; ++i) c.access(i * 8 * 64, AccessKind::Read);
  for (std::uint64_t i = 0; i < 16; ++i) EXPECT_TRUE(c.contains(i * 8 * 64));
}

TEST(Cache, MoreWaysAtEqualSetsNeverHurt) {
  std::mt19937_64 rng(99);
  std::vector<std::uint64_t> trace(10000);
  for (auto& a : trace) a = (rng() % 4096) * 64;
  std::uint64_t prev_hits = 0;
  for (std::uint32_t ways : {1u, 2u, 4u, 8u, 16u}) {
    Cache c({std::uint64_t{64} * ways * 64, ways, 64, WritePolicy::WriteBack});  // 64 sets
    std::uint64_t hits = 0;
    for (auto a : trace) hits += c.access(a, AccessKind::Read).hit ? 1 : 0;
    EXPECT_GE(hits, prev_hits) << ways << " ways";
    prev_hits = hits;
  }
}

TEST(Tlb, ThirtyTwoEntriesFullyAssociative) {
  Tlb t({1, 32});
  for (std::uint64_t v = 0; v < 32; ++v) EXPECT_FALSE(t.access(v));
  EXPECT_TRUE(t.access(0));

  Tlb u({1, 32});
  for (std::uint64_t v = 0; v < 33; ++v) u.access(v);
  EXPECT_FALSE(u.access(0));
}

TEST(Tlb, RepeatedVpnMissesOnce) {
  Tlb t({32, 16});
  int misses = 0;
  for (int i = 0; i < 100; ++i) misses += t.access(1234) ? 0 : 1;
  EXPECT_EQ(misses, 1);
}

TEST(Tlb, MatchesBruteForceLruOnRandomVpns) {
  Tlb t({32, 16});
  oracle::LruReference ref(32, 16, true, false);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t vpn = rng() % 1500;
    ASSERT_EQ(t.access(vpn), ref.access(vpn, false).hit) << "access " << i;
  }
}

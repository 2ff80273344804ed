#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mgpusim/paging.hpp"
#include "oracles/page_map_reference.hpp"

using namespace mgpusim;

namespace {

ValidatedConfig cfg(Mode m) {
  SystemConfig c;
  c.mode = m;
  return validate(c);
}

DeviceId gpu(std::uint32_t g) { return DeviceId::gpu_dev(g); }

// Resolves a touch the way the engine does: place on first touch, migrate
// on a UM remote fault.
void touch(PageTable& pt, std::uint64_t vpn, const DeviceId& who) {
  const auto tr = pt.translate(vpn * pt.page_bytes(), who, SimTime{});
  if (!tr.mapped) {
    pt.place_page(vpn, who, SimTime{});
  } else if (tr.remote_fault) {
    pt.migrate_page(vpn, who, SimTime{});
  }
}

}  // namespace

TEST(PageTable, TsmConsecutivePagesGoToNeighboringBanks) {
  PageTable pt(cfg(Mode::TSM));
  for (std::uint64_t v = 0; v < 8; ++v) EXPECT_EQ(pt.place_page(v, gpu(v % 4), SimTime{}).home_bank, v);
}

TEST(PageTable, InterleavedUsesEveryBankOnce) {
  PageTable pt(cfg(Mode::TSM));
  std::multiset<std::uint32_t> banks;
  for (std::uint64_t v = 0; v < 64; ++v) banks.insert(pt.place_page(v, gpu(0), SimTime{}).home_bank);
  for (std::uint32_t b = 0; b < 64; ++b) EXPECT_EQ(banks.count(b), 1u);
}

TEST(PageTable, TranslationIsIdempotent) {
  for (Mode m : {Mode::TSM, Mode::RDMA, Mode::UM}) {
    PageTable pt(cfg(m));
    pt.place_page(3, gpu(1), SimTime{});
    const auto a = pt.translate(3 * 4096 + 100, gpu(1), SimTime{});
    const auto b = pt.translate(3 * 4096 + 100, gpu(1), SimTime{});
    EXPECT_TRUE(a.mapped);
    EXPECT_EQ(a.location.bank, b.location.bank);
    EXPECT_EQ(a.location.paddr, b.location.paddr);
    EXPECT_EQ(pt.mapped_pages(), 1u);
    EXPECT_THROW(pt.place_page(3, gpu(0), SimTime{}), SimError);
  }
}

TEST(PageTable, LocalOwnerPlacesInRequesterIsland) {
  PageTable pt(cfg(Mode::RDMA));
  const auto& e = pt.place_page(9, gpu(2), SimTime{});
  EXPECT_EQ(pt.bank_island(e.home_bank), 2u);
  EXPECT_FALSE(pt.translate(9 * 4096, gpu(2), SimTime{}).remote);
  EXPECT_TRUE(pt.translate(9 * 4096, gpu(0), SimTime{}).remote);
  EXPECT_FALSE(pt.translate(9 * 4096, gpu(0), SimTime{}).remote_fault);
}

TEST(PageTable, FirstTouchByCpuLandsInHostMemory) {
  PageTable pt(cfg(Mode::UM));
  const auto& e = pt.place_page(1, DeviceId::cpu(), SimTime{});
  EXPECT_EQ(e.owner, DeviceId::cpu());
  EXPECT_EQ(pt.bank_island(e.home_bank), kHostIsland);
}

TEST(PageTable, UmTouchByAnotherGpuIsARemoteFault) {
  PageTable pt(cfg(Mode::UM));
  pt.place_page(5, gpu(0), SimTime{});
  const auto tr = pt.translate(5 * 4096, gpu(1), SimTime{});
  EXPECT_TRUE(tr.mapped);
  EXPECT_TRUE(tr.remote_fault);
  EXPECT_EQ(tr.owner, gpu(0));
}

TEST(PageTable, MigrationCostAndPostcondition) {
  PageTable pt(cfg(Mode::UM));
  pt.place_page(5, gpu(0), SimTime{});
  const MigrationJob job = pt.migrate_page(5, gpu(1), SimTime::us(1));
  EXPECT_EQ(job.bytes, 4096u);
  EXPECT_EQ(job.fault_overhead, SimTime::us(20));
  // Page copy over one idle 32 GB/s off-chip hop.
  EXPECT_EQ(serialization_time(job.bytes, 32e9) + SimTime::ns(400) + job.fault_overhead,
            SimTime::ns(128 + 400 + 20000));
  const auto tr = pt.translate(5 * 4096, gpu(1), SimTime{});
  EXPECT_FALSE(tr.remote_fault);
  EXPECT_FALSE(tr.remote);
  EXPECT_EQ(pt.bank_island(tr.location.bank), 1u);
}

TEST(PageTable, PingPongMigratesEveryTouch) {
  PageTable pt(cfg(Mode::UM));
  touch(pt, 7, gpu(0));  // warm-up placement
  for (int i = 0; i < 10; ++i) {
    touch(pt, 7, gpu(1));
    touch(pt, 7, gpu(0));
  }
  EXPECT_EQ(pt.find(7)->migration_count, 20u);
}

TEST(PageTable, MigrationOutsideUmIsAModeViolation) {
  for (Mode m : {Mode::TSM, Mode::RDMA}) {
    PageTable pt(cfg(m));
    pt.place_page(1, gpu(0), SimTime{});
    try {
      pt.migrate_page(1, gpu(1), SimTime{});
      FAIL();
    } catch (const SimError& e) {
      EXPECT_EQ(e.category(), ErrorCategory::ModeViolation);
    }
  }
}

TEST(PageTable, FramesStayUniqueUnderMigration) {
  PageTable pt(cfg(Mode::UM));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) touch(pt, rng() % 300, gpu(static_cast<std::uint32_t>(rng() % 4)));
  std::set<std::uint64_t> ppns;
  pt.for_each_entry([&](const PageTableEntry& e) {
    EXPECT_TRUE(ppns.insert(e.ppn).second) << "ppn reused by vpn " << e.vpn;
    EXPECT_EQ(pt.bank_of_ppn(e.ppn), e.home_bank);
  });
}

TEST(PageTable, OutOfMemoryIsReported) {
  SystemConfig c;
  c.mode = Mode::RDMA;
  c.dram_bank_mb = 1;
  c.dram_banks_per_gpu = 1;
  PageTable pt(validate(c));
  for (std::uint64_t v = 0; v < 256; ++v) pt.place_page(v, gpu(0), SimTime{});
  try {
    pt.place_page(999, gpu(0), SimTime{});
    FAIL();
  } catch (const SimError& e) {
    EXPECT_EQ(e.category(), ErrorCategory::OutOfMemory);
  }
}

TEST(PageTable, MatchesReplayReferenceForAllPolicies) {
  struct Case {
    Mode mode;
    oracle::RefPolicy ref;
  };
  for (const Case& k : {Case{Mode::TSM, oracle::RefPolicy::Interleaved},
                        Case{Mode::RDMA, oracle::RefPolicy::LocalOwner},
                        Case{Mode::UM, oracle::RefPolicy::FirstTouchMigrate}}) {
    PageTable pt(cfg(k.mode));
    oracle::PageMapReference ref(k.ref, 4, 16, 16);
    std::mt19937_64 rng(static_cast<std::uint64_t>(k.mode) + 11);
    for (int i = 0; i < 10000; ++i) {
      const std::uint64_t vpn = rng() % 2000;
      const auto r = rng() % 5;
      const DeviceId who = r == 4 ? DeviceId::cpu() : gpu(static_cast<std::uint32_t>(r));
      touch(pt, vpn, who);
      ref.touch({vpn, r == 4 ? oracle::PageMapReference::host : static_cast<std::uint32_t>(r)});
    }
    ASSERT_EQ(pt.mapped_pages(), ref.map().size());
    for (const auto& [vpn, want] : ref.map()) {
      const PageTableEntry* e = pt.find(vpn);
      ASSERT_NE(e, nullptr);
      ASSERT_EQ(e->home_bank, want.bank) << "vpn " << vpn;
      ASSERT_EQ(e->migration_count, want.moves) << "vpn " << vpn;
      if (k.mode != Mode::TSM) ASSERT_EQ(island_of(e->owner), want.island) << "vpn " << vpn;
    }
  }
}

#include <gtest/gtest.h>

#include <set>

#include "mgpusim/config.hpp"
#include "mgpusim/interconnect.hpp"
#include "mgpusim/topology.hpp"

using namespace mgpusim;

namespace {

ValidatedConfig with_mode(Mode m, std::uint32_t gpus = 4) {
  SystemConfig c;
  c.mode = m;
  c.num_gpus = gpus;
  return validate(c);
}

DeviceId dram(std::uint32_t k) { return {DeviceKind::DramBank, 0, k}; }

}  // namespace

TEST(Config, DefaultsDeriveMemoryAndBandwidthTotals) {
  const auto vc = validate(SystemConfig{});
  EXPECT_EQ(vc.total_mm_bytes(), 32ULL << 30);
  // 4 GPUs x 8 L2 ports x 32 GB/s: 1 TB/s in the 1024-GB convention.
  EXPECT_DOUBLE_EQ(vc.aggregate_l2_mm_bw(), 4.0 * 8 * 32e9);
  EXPECT_DOUBLE_EQ(vc.aggregate_l2_mm_bw(), 1.024e12);
}

TEST(Config, SingleGpuIsValid) {
  const auto vc = with_mode(Mode::RDMA, 1);
  EXPECT_EQ(vc.total_mm_bytes(), 8ULL << 30);
}

TEST(Config, PageSizeMustBeAPowerOfTwo) {
  SystemConfig c;
  c.page_size_bytes = 3000;
  try {
    validate(c);
    FAIL() << "expected a config error";
  } catch (const SimError& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Config);
    EXPECT_NE(std::string(e.what()).find("page size must be a power of two"), std::string::npos);
  }
}

TEST(Config, TextRoundTripAndUnknownKeys) {
  SystemConfig c;
  c.mode = Mode::UM;
  c.offchip_hop_ns = 123.5;
  c.um_remote_map = true;
  const SystemConfig back = parse_config_text(to_config_text(c));
  EXPECT_EQ(back, c);
  EXPECT_THROW(parse_config_text("no_such_key = 1\n"), SimError);
  EXPECT_THROW(parse_config_text("num_gpus = four\n"), SimError);
  const SystemConfig partial = parse_config_text("# comment\nmode = rdma\n\nnum_gpus=2\n");
  EXPECT_EQ(partial.mode, Mode::RDMA);
  EXPECT_EQ(partial.num_gpus, 2u);
  EXPECT_EQ(partial.l2_bank_kb, SystemConfig{}.l2_bank_kb);
}

TEST(Topology, TsmEveryL2ReachesEveryBankInTwoHops) {
  const auto vc = with_mode(Mode::TSM);
  const Topology t = build_topology(vc);
  EXPECT_EQ(t.max_switch_ports(), 32u + 64u + 1u);
  EXPECT_EQ(t.offchip_link_count(), 0u);
  for (std::uint32_t g = 0; g < 4; ++g)
    for (std::uint32_t b = 0; b < 8; ++b)
      for (std::uint32_t k = 0; k < t.num_dram_banks(); ++k)
        ASSERT_EQ(route(t, DeviceId::l2_bank(g, b), dram(k)).hop_count(), 2u);
}

TEST(Topology, TsmPathNamesTheTwoPortLinks) {
  const Topology t = build_topology(with_mode(Mode::TSM));
  const Path p = route(t, DeviceId::l2_bank(0, 3), dram(17));
  ASSERT_EQ(p.hop_count(), 2u);
  const auto& first = t.links()[p.hops[0].link];
  const auto& second = t.links()[p.hops[1].link];
  EXPECT_EQ(first.name, "l2[0.3]<->switch[0]");
  EXPECT_EQ(p.hops[0].dir, 0);
  EXPECT_EQ(second.name, "switch[0]<->dram[17@1]");
  EXPECT_EQ(p.hops[1].dir, 0);
}

TEST(Topology, RdmaRemoteBankOnlyViaOneOffchipLink) {
  const Topology t = build_topology(with_mode(Mode::RDMA));
  // GPU1's banks are 16..31.
  for (std::uint32_t k = 16; k < 32; ++k) {
    const Path p = route(t, DeviceId::l2_bank(0, 2), dram(k));
    EXPECT_EQ(offchip_hops(t, p), 1u);
  }
  for (std::uint32_t k = 0; k < 16; ++k) {
    const Path p = route(t, DeviceId::l2_bank(0, 2), dram(k));
    EXPECT_EQ(offchip_hops(t, p), 0u);
    EXPECT_LE(p.hop_count(), 2u);
  }
}

TEST(Topology, SingleGpuHasNoGpuToGpuLinks) {
  for (Mode m : {Mode::TSM, Mode::RDMA, Mode::UM}) {
    const Topology t = build_topology(with_mode(m, 1));
    for (const auto& l : t.links()) {
      const auto& a = t.nodes()[l.a];
      const auto& b = t.nodes()[l.b];
      const bool gpu_gpu = l.offchip && a.gpu != kHostIsland && b.gpu != kHostIsland;
      EXPECT_FALSE(gpu_gpu) << l.name;
    }
  }
}

TEST(Topology, CapacityConservation) {
  for (Mode m : {Mode::TSM, Mode::RDMA, Mode::UM}) {
    const auto vc = with_mode(m);
    const Topology t = build_topology(vc);
    EXPECT_EQ(t.total_capacity_bytes(), vc.total_mm_bytes() + vc.host_mm_bytes());
    std::uint64_t gpu_attached = 0;
    for (std::uint32_t k = 0; k < t.num_dram_banks(); ++k)
      if (t.bank_island(k) != kHostIsland) gpu_attached += t.bank_capacity_bytes();
    EXPECT_EQ(gpu_attached, 32ULL << 30);
  }
}

TEST(Topology, ModeIsolation) {
  const Topology tsm = build_topology(with_mode(Mode::TSM));
  for (const auto& l : tsm.links()) EXPECT_FALSE(l.offchip);

  const Topology rdma = build_topology(with_mode(Mode::RDMA));
  // Every on-chip link stays inside one island.
  for (const auto& l : rdma.links()) {
    if (l.offchip) continue;
    const auto& a = rdma.nodes()[l.a];
    const auto& b = rdma.nodes()[l.b];
    if (a.kind == DeviceKind::Cpu || b.kind == DeviceKind::Cpu) continue;
    EXPECT_EQ(a.gpu, b.gpu) << l.name;
  }
  // 6 GPU pairs + 4 GPU-host links.
  EXPECT_EQ(rdma.offchip_link_count(), 10u);
}

TEST(Routing, CanonicalAndMemoized) {
  const Topology t = build_topology(with_mode(Mode::UM));
  Router r(t);
  const Path& a = r.path(t.l2_node(2, 5), t.dram_node(40));
  const Path& b = r.path(t.l2_node(2, 5), t.dram_node(40));
  EXPECT_EQ(&a, &b);
  EXPECT_EQ(a, route_nodes(t, t.l2_node(2, 5), t.dram_node(40)));
  EXPECT_THROW(route(t, DeviceId::gpu_dev(0), dram(0)), SimError);
}

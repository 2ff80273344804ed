#include <gtest/gtest.h>

#include "mgpusim/interconnect.hpp"

using namespace mgpusim;

namespace {

Topology tsm() { return build_topology(validate(SystemConfig{})); }

Hop first_hop(const Topology& t) { return route(t, DeviceId::l2_bank(0, 0), {DeviceKind::DramBank, 0, 0}).hops[0]; }

}  // namespace

TEST(Network, PageOverOneIdleHop) {
  const Topology t = tsm();
  Network net(t);
  const SimTime ready = SimTime::ns(1000);
  EXPECT_EQ(net.traverse(first_hop(t), 4096, ready), ready + SimTime::ns(148));
}

TEST(Network, BackToBackTransfersSerialize) {
  const Topology t = tsm();
  Network net(t);
  const Hop h = first_hop(t);
  const SimTime a = net.traverse(h, 4096, SimTime{});
  const SimTime b = net.traverse(h, 4096, SimTime{});
  EXPECT_EQ(b - a, SimTime::ns(128));
  // The opposite direction is independent.
  const SimTime c = net.traverse({h.link, 1}, 4096, SimTime{});
  EXPECT_EQ(c, a);
}

TEST(Network, OneByteOverZeroLatencyHop) {
  SystemConfig cfg;
  cfg.switch_hop_ns = 0;
  const Topology t = build_topology(validate(cfg));
  Network net(t);
  const SimTime ready = SimTime(777);
  // ceil(1 B / 32e9 B/s) = ceil(31.25 ps) = 32 ps
  EXPECT_EQ(net.traverse(first_hop(t), 1, ready), ready + SimTime(32));
}

TEST(Network, TwoHopTransferIsStoreAndForward) {
  const Topology t = tsm();
  Network net(t);
  const Path p = route(t, DeviceId::l2_bank(1, 2), {DeviceKind::DramBank, 0, 9});
  EXPECT_EQ(net.transfer(p, 64, SimTime{}), SimTime::ns(2 * (2 + 20)));
  EXPECT_THROW(net.transfer(p, 0, SimTime{}), SimError);
}

TEST(Network, OccupancyLedgerNeverExceedsBandwidth) {
  const Topology t = tsm();
  Network net(t);
  net.enable_occupancy_log(true);
  const Hop h = first_hop(t);
  // A burst of 1000 lines all ready at time 0, plus stragglers.
  for (int i = 0; i < 1000; ++i) net.traverse(h, 64, SimTime{});
  for (int i = 0; i < 100; ++i) net.traverse(h, 64, SimTime::ns(10 * i));
  const auto& log = net.occupancy(h.link, h.dir);
  ASSERT_EQ(log.size(), 1100u);
  std::uint64_t bytes = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    bytes += log[i].bytes;
    if (i > 0) EXPECT_GE(log[i].start, log[i - 1].end);  // one transfer at a time
    // Bytes serialized in [0, end_i] never exceed bw * end_i.
    EXPECT_LE(static_cast<double>(bytes), 32e9 * log[i].end.seconds() * (1 + 1e-12));
  }
  const auto& s = net.stats(h.link, h.dir);
  EXPECT_EQ(s.bytes, 1100u * 64u);
  EXPECT_EQ(s.transfers, 1100u);
  EXPECT_EQ(s.busy_ps, 1100 * 2000);
}

TEST(Network, QueuedLinkIsNeverIdle) {
  const Topology t = tsm();
  Network net(t);
  net.enable_occupancy_log(true);
  const Hop h = first_hop(t);
  for (int i = 0; i < 50; ++i) net.traverse(h, 256, SimTime{});
  const auto& log = net.occupancy(h.link, h.dir);
  for (std::size_t i = 1; i < log.size(); ++i) EXPECT_EQ(log[i].start, log[i - 1].end);
}

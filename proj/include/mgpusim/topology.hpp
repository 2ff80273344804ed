#pragma once

// System graph for the three memory organizations.
//
//  TSM:       every L2 bank, every DRAM bank and the CPU hang off one central
//             switch, so any L2 bank reaches any DRAM bank in two hops.
//  RDMA, UM:  each GPU is an island (its L2 banks and DRAM banks behind a
//             local switch); the CPU and host memory sit behind a host switch;
//             off-chip links join every GPU pair and every GPU to the host.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "mgpusim/config.hpp"

namespace mgpusim {

enum class DeviceKind : std::uint8_t { Cpu, Gpu, L2Bank, DramBank, Switch };

/// Island value used for host (CPU-attached) memory and the host switch.
inline constexpr std::uint32_t kHostIsland = 0xFFFFFFFFu;

struct DeviceId {
  DeviceKind kind = DeviceKind::Cpu;
  std::uint32_t gpu = 0;    // owning GPU / island / HBM stack
  std::uint32_t index = 0;  // bank index (L2: within GPU; DRAM: global)

  static constexpr DeviceId cpu() { return {DeviceKind::Cpu, kHostIsland, 0}; }
  static constexpr DeviceId gpu_dev(std::uint32_t g) { return {DeviceKind::Gpu, g, 0}; }
  static constexpr DeviceId l2_bank(std::uint32_t g, std::uint32_t b) {
    return {DeviceKind::L2Bank, g, b};
  }

  friend constexpr bool operator==(const DeviceId&, const DeviceId&) = default;
};

inline std::string to_string(const DeviceId& d) {
  auto island = [](std::uint32_t g) {
    return g == kHostIsland ? std::string("host") : std::to_string(g);
  };
  switch (d.kind) {
    case DeviceKind::Cpu: return "cpu";
    case DeviceKind::Gpu: return "gpu" + std::to_string(d.gpu);
    case DeviceKind::L2Bank: return "l2[" + std::to_string(d.gpu) + "." + std::to_string(d.index) + "]";
    case DeviceKind::DramBank: return "dram[" + std::to_string(d.index) + "@" + island(d.gpu) + "]";
    case DeviceKind::Switch: return "switch[" + island(d.gpu) + "]";
  }
  return "?";
}

struct LinkSpec {
  std::uint32_t a = 0;  // node index; direction 0 is a -> b
  std::uint32_t b = 0;
  double bw_bytes_per_sec = 0.0;
  SimTime hop_latency;
  bool offchip = false;
  bool l2_port = false;  // one endpoint is an L2 bank
  std::string name;
};

class Topology {
 public:
  struct Adjacent {
    std::uint32_t link;
    std::uint32_t neighbor;
  };

  Mode mode() const { return mode_; }
  const std::vector<DeviceId>& nodes() const { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  const std::vector<Adjacent>& adjacent(std::uint32_t node) const { return adj_.at(node); }

  std::uint32_t cpu_node() const { return cpu_node_; }
  std::uint32_t l2_node(std::uint32_t gpu, std::uint32_t bank) const {
    return l2_base_ + gpu * l2_per_gpu_ + bank;
  }
  std::uint32_t dram_node(std::uint32_t bank) const { return dram_base_ + bank; }
  std::uint32_t num_dram_banks() const { return num_dram_; }
  std::uint32_t num_gpus() const { return num_gpus_; }

  /// Switch nodes: TSM has one (index 0); otherwise one per GPU then the host switch.
  std::uint32_t switch_node(std::uint32_t i) const { return switch_base_ + i; }
  std::uint32_t num_switches() const { return num_switches_; }

  /// Ports on the central switch (TSM) or the largest switch (RDMA/UM).
  std::uint32_t max_switch_ports() const {
    std::size_t best = 0;
    for (std::uint32_t i = 0; i < num_switches_; ++i)
      best = std::max(best, adj_[switch_node(i)].size());
    return static_cast<std::uint32_t>(best);
  }

  /// Island owning a DRAM bank: HBM stack in TSM, GPU or host otherwise.
  std::uint32_t bank_island(std::uint32_t bank) const { return nodes_[dram_node(bank)].gpu; }

  std::uint64_t bank_capacity_bytes() const { return bank_bytes_; }
  std::uint64_t total_capacity_bytes() const { return bank_bytes_ * num_dram_; }

  std::uint32_t offchip_link_count() const {
    std::uint32_t n = 0;
    for (const auto& l : links_) n += l.offchip ? 1 : 0;
    return n;
  }

 private:
  friend Topology build_topology(const ValidatedConfig&);

  std::uint32_t add_node(DeviceId d) {
    nodes_.push_back(d);
    adj_.emplace_back();
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  void add_link(std::uint32_t a, std::uint32_t b, double bw, SimTime lat, bool offchip) {
    LinkSpec l{a, b, bw, lat, offchip,
               nodes_[a].kind == DeviceKind::L2Bank || nodes_[b].kind == DeviceKind::L2Bank,
               to_string(nodes_[a]) + "<->" + to_string(nodes_[b])};
    const auto id = static_cast<std::uint32_t>(links_.size());
    links_.push_back(std::move(l));
    adj_[a].push_back({id, b});
    adj_[b].push_back({id, a});
  }

  Mode mode_ = Mode::TSM;
  std::vector<DeviceId> nodes_;
  std::vector<LinkSpec> links_;
  std::vector<std::vector<Adjacent>> adj_;
  std::uint32_t cpu_node_ = 0;
  std::uint32_t l2_base_ = 0, l2_per_gpu_ = 0;
  std::uint32_t dram_base_ = 0, num_dram_ = 0;
  std::uint32_t switch_base_ = 0, num_switches_ = 0;
  std::uint32_t num_gpus_ = 0;
  std::uint64_t bank_bytes_ = 0;
};

inline Topology build_topology(const ValidatedConfig& vc) {
  const SystemConfig& c = vc.raw();
  Topology t;
  t.mode_ = c.mode;
  t.num_gpus_ = c.num_gpus;
  t.bank_bytes_ = vc.dram_bank_bytes();
  t.l2_per_gpu_ = c.l2_banks_per_gpu;
  const bool shared = c.mode == Mode::TSM;

  t.cpu_node_ = t.add_node(DeviceId::cpu());
  t.l2_base_ = static_cast<std::uint32_t>(t.nodes_.size());
  for (std::uint32_t g = 0; g < c.num_gpus; ++g)
    for (std::uint32_t b = 0; b < c.l2_banks_per_gpu; ++b) t.add_node(DeviceId::l2_bank(g, b));

  t.dram_base_ = static_cast<std::uint32_t>(t.nodes_.size());
  t.num_dram_ = vc.total_dram_banks();
  for (std::uint32_t k = 0; k < t.num_dram_; ++k) {
    const std::uint32_t island = k < vc.gpu_dram_banks() ? k / c.dram_banks_per_gpu : kHostIsland;
    t.add_node({DeviceKind::DramBank, island, k});
  }

  t.switch_base_ = static_cast<std::uint32_t>(t.nodes_.size());
  const double bw = vc.link_bw();
  const SimTime hop = from_ns(c.switch_hop_ns);
  if (shared) {
    t.num_switches_ = 1;
    const auto sw = t.add_node({DeviceKind::Switch, 0, 0});
    for (std::uint32_t g = 0; g < c.num_gpus; ++g)
      for (std::uint32_t b = 0; b < c.l2_banks_per_gpu; ++b) t.add_link(t.l2_node(g, b), sw, bw, hop, false);
    for (std::uint32_t k = 0; k < t.num_dram_; ++k) t.add_link(sw, t.dram_node(k), bw, hop, false);
    t.add_link(t.cpu_node_, sw, bw, hop, false);
    return t;
  }

  t.num_switches_ = c.num_gpus + 1;
  for (std::uint32_t g = 0; g < c.num_gpus; ++g) t.add_node({DeviceKind::Switch, g, g});
  const auto host_sw = t.add_node({DeviceKind::Switch, kHostIsland, c.num_gpus});
  for (std::uint32_t g = 0; g < c.num_gpus; ++g)
    for (std::uint32_t b = 0; b < c.l2_banks_per_gpu; ++b)
      t.add_link(t.l2_node(g, b), t.switch_node(g), bw, hop, false);
  for (std::uint32_t k = 0; k < t.num_dram_; ++k) {
    const auto island = t.bank_island(k);
    t.add_link(island == kHostIsland ? host_sw : t.switch_node(island), t.dram_node(k), bw, hop, false);
  }
  t.add_link(t.cpu_node_, host_sw, bw, hop, false);

  const double obw = vc.offchip_bw();
  const SimTime ohop = from_ns(c.offchip_hop_ns);
  for (std::uint32_t g = 0; g < c.num_gpus; ++g)
    for (std::uint32_t h = g + 1; h < c.num_gpus; ++h)
      t.add_link(t.switch_node(g), t.switch_node(h), obw, ohop, true);
  for (std::uint32_t g = 0; g < c.num_gpus; ++g) t.add_link(t.switch_node(g), host_sw, obw, ohop, true);
  return t;
}

}  // namespace mgpusim

#pragma once

// Routing and store-and-forward link contention.
//
// Each link direction is a FIFO server: a transfer that reaches a hop starts
// when both it and the link direction are free, holds the link for
// ceil(bytes / bw), then pays the hop latency before reaching the next hop.
// The central switch is non-blocking; only its port links contend.

#include <cstdint>
#include <algorithm>
#include <array>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgpusim/topology.hpp"

namespace mgpusim {

struct Hop {
  std::uint32_t link = 0;
  std::uint8_t dir = 0;  // 0: LinkSpec::a -> b, 1: b -> a
  friend constexpr bool operator==(const Hop&, const Hop&) = default;
};

struct Path {
  std::vector<Hop> hops;
  std::size_t hop_count() const { return hops.size(); }
  friend bool operator==(const Path&, const Path&) = default;
};

inline std::uint32_t node_of(const Topology& t, const DeviceId& d) {
  switch (d.kind) {
    case DeviceKind::Cpu: return t.cpu_node();
    case DeviceKind::L2Bank:
      if (d.gpu < t.num_gpus()) return t.l2_node(d.gpu, d.index);
      break;
    case DeviceKind::DramBank:
      if (d.index < t.num_dram_banks()) return t.dram_node(d.index);
      break;
    case DeviceKind::Switch:
      if (d.index < t.num_switches()) return t.switch_node(d.index);
      break;
    case DeviceKind::Gpu: break;
  }
  fail(ErrorCategory::Integrity, "device " + to_string(d) + " is not a node of the topology");
}

/// Shortest path from src to dst with only switches as intermediate nodes.
/// Ties resolve in link-creation order, so the path is canonical.
inline Path route_nodes(const Topology& t, std::uint32_t src, std::uint32_t dst) {
  Path p;
  if (src == dst) return p;
  const auto n = t.nodes().size();
  std::vector<std::int64_t> via(n, -1);  // link used to reach node
  std::vector<bool> seen(n, false);
  std::deque<std::uint32_t> frontier{src};
  seen[src] = true;
  while (!frontier.empty() && !seen[dst]) {
    const auto u = frontier.front();
    frontier.pop_front();
    if (u != src && t.nodes()[u].kind != DeviceKind::Switch) continue;
    for (const auto& [link, v] : t.adjacent(u)) {
      if (seen[v]) continue;
      seen[v] = true;
      via[v] = link;
      frontier.push_back(v);
    }
  }
  if (!seen[dst]) {
    fail(ErrorCategory::Integrity, "no route from " + to_string(t.nodes()[src]) + " to " +
                                       to_string(t.nodes()[dst]));
  }
  for (auto v = dst; v != src;) {
    const auto& l = t.links()[static_cast<std::size_t>(via[v])];
    const bool forward = l.b == v;
    p.hops.push_back({static_cast<std::uint32_t>(via[v]), static_cast<std::uint8_t>(forward ? 0 : 1)});
    v = forward ? l.a : l.b;
  }
  std::reverse(p.hops.begin(), p.hops.end());
  return p;
}

inline Path route(const Topology& t, const DeviceId& src, const DeviceId& dst) {
  return route_nodes(t, node_of(t, src), node_of(t, dst));
}

inline std::size_t offchip_hops(const Topology& t, const Path& p) {
  std::size_t n = 0;
  for (const auto& h : p.hops) n += t.links()[h.link].offchip ? 1 : 0;
  return n;
}

/// Memoizing router over node pairs.
class Router {
 public:
  explicit Router(const Topology& t) : topo_(&t) {}

  const Path& path(std::uint32_t src_node, std::uint32_t dst_node) {
    const std::uint64_t key = (std::uint64_t{src_node} << 32) | dst_node;
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, route_nodes(*topo_, src_node, dst_node)).first;
    return it->second;
  }

 private:
  const Topology* topo_;
  std::unordered_map<std::uint64_t, Path> cache_;
};

struct LinkDirStats {
  std::uint64_t bytes = 0;
  std::uint64_t transfers = 0;
  std::int64_t busy_ps = 0;
  friend bool operator==(const LinkDirStats&, const LinkDirStats&) = default;
};

/// One occupancy interval on a link direction.
struct Occupancy {
  SimTime start;
  SimTime end;
  std::uint64_t bytes;
};

/// Mutable contention state for every link of a topology.
class Network {
 public:
  explicit Network(const Topology& t) : topo_(&t), state_(t.links().size()) {}

  const Topology& topology() const { return *topo_; }

  /// Keep a per-direction occupancy log (used by throughput checks).
  void enable_occupancy_log(bool on) { log_ = on; }

  /// Passes one hop; returns the arrival time at the far end.
  SimTime traverse(const Hop& h, std::uint64_t bytes, SimTime arrival) {
    const LinkSpec& spec = topo_->links()[h.link];
    Dir& d = state_[h.link][h.dir];
    const SimTime start = max(arrival, d.next_free);
    const SimTime occ = serialization_time(bytes, spec.bw_bytes_per_sec);
    d.next_free = start + occ;
    d.stats.bytes += bytes;
    d.stats.transfers += 1;
    d.stats.busy_ps += occ.count();
    if (log_) d.log.push_back({start, start + occ, bytes});
    return start + occ + spec.hop_latency;
  }

  /// Whole-path store-and-forward transfer; returns arrival at the last hop.
  SimTime transfer(const Path& p, std::uint64_t bytes, SimTime ready) {
    if (bytes == 0) fail(ErrorCategory::Integrity, "transfer of zero bytes");
    SimTime t = ready;
    for (const auto& h : p.hops) t = traverse(h, bytes, t);
    return t;
  }

  SimTime next_free(const Hop& h) const { return state_[h.link][h.dir].next_free; }
  const LinkDirStats& stats(std::uint32_t link, int dir) const { return state_[link][dir].stats; }
  const std::vector<Occupancy>& occupancy(std::uint32_t link, int dir) const {
    return state_[link][dir].log;
  }

 private:
  struct Dir {
    SimTime next_free;
    LinkDirStats stats;
    std::vector<Occupancy> log;
  };

  const Topology* topo_;
  std::vector<std::array<Dir, 2>> state_;
  bool log_ = false;
};

}  // namespace mgpusim

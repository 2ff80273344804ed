#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgpusim/config.hpp"
#include "mgpusim/interconnect.hpp"

namespace mgpusim {

struct Counters {
  std::uint64_t l1_hits = 0;
  std::uint64_t l1_misses = 0;
  std::uint64_t l2_hits = 0;
  std::uint64_t l2_misses = 0;
  std::uint64_t l2_mshr_merges = 0;  // misses merged into an in-flight fill
  std::uint64_t l1_tlb_misses = 0;
  std::uint64_t tlb_misses = 0;  // page walks (missed both TLB levels)
  std::uint64_t cpu_cache_hits = 0;
  std::uint64_t cpu_cache_misses = 0;
  std::uint64_t dram_accesses = 0;
  std::uint64_t remote_accesses = 0;  // demand lines whose path crosses an off-chip link
  std::uint64_t remote_bytes = 0;
  std::uint64_t page_faults = 0;
  std::uint64_t migrations = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t read_bytes = 0;
  std::uint64_t write_bytes = 0;
  std::uint64_t copy_bytes = 0;
  std::uint64_t bytes_issued = 0;
  std::uint64_t bytes_on_offchip_links = 0;
  std::uint64_t bytes_on_switch_links = 0;
  std::uint64_t bytes_l2_mm = 0;  // bytes through L2 port links
  std::uint64_t events = 0;

  friend bool operator==(const Counters&, const Counters&) = default;
};

template <typename C, typename F>
void for_each_counter(C& c, F&& f) {
  f("l1_hits", c.l1_hits);
  f("l1_misses", c.l1_misses);
  f("l2_hits", c.l2_hits);
  f("l2_misses", c.l2_misses);
  f("l2_mshr_merges", c.l2_mshr_merges);
  f("l1_tlb_misses", c.l1_tlb_misses);
  f("tlb_misses", c.tlb_misses);
  f("cpu_cache_hits", c.cpu_cache_hits);
  f("cpu_cache_misses", c.cpu_cache_misses);
  f("dram_accesses", c.dram_accesses);
  f("remote_accesses", c.remote_accesses);
  f("remote_bytes", c.remote_bytes);
  f("page_faults", c.page_faults);
  f("migrations", c.migrations);
  f("writebacks", c.writebacks);
  f("read_bytes", c.read_bytes);
  f("write_bytes", c.write_bytes);
  f("copy_bytes", c.copy_bytes);
  f("bytes_issued", c.bytes_issued);
  f("bytes_on_offchip_links", c.bytes_on_offchip_links);
  f("bytes_on_switch_links", c.bytes_on_switch_links);
  f("bytes_l2_mm", c.bytes_l2_mm);
  f("events", c.events);
}

struct LinkReport {
  std::string name;
  bool offchip = false;
  double bw_bytes_per_sec = 0.0;
  LinkDirStats forward;
  LinkDirStats reverse;
  friend bool operator==(const LinkReport&, const LinkReport&) = default;
};

struct StatsReport {
  Mode mode = Mode::TSM;
  std::string workload;
  std::string fingerprint;
  std::int64_t sim_time_ps = 0;
  Counters counters;
  std::vector<LinkReport> links;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(std::string_view s) {
    add(s.data(), s.size());
    add_u64(s.size());
  }
  void add_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    add(b, 8);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace mgpusim

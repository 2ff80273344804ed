#pragma once

// Trace-driven simulation of one (configuration, workload) pair.
//
// Issue model: every CU and the CPU walk their own records in trace order,
// one cache line per cycle, with a bounded number of lines in flight. Copy
// records run on a per-device copy engine, one record at a time, all page
// chunks in flight together. Barrier records split the trace into phases;
// nothing from a later phase issues until the earlier phases complete.
//
// Line path (GPU):  TLBs -> write-through L1 -> L2 bank -> network -> DRAM.
// In RDMA/UM a line homed in another island bypasses the requester's L2 and
// crosses one off-chip link. In UM an access to a page owned by another
// device faults, waits for the device's fault handler and migrates the page
// before retrying.

#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mgpusim/cache.hpp"
#include "mgpusim/config.hpp"
#include "mgpusim/dram.hpp"
#include "mgpusim/event_queue.hpp"
#include "mgpusim/interconnect.hpp"
#include "mgpusim/paging.hpp"
#include "mgpusim/stats.hpp"
#include "mgpusim/topology.hpp"
#include "mgpusim/workloads.hpp"

namespace mgpusim {

inline std::string config_fingerprint(const ValidatedConfig& vc, const Workload& w) {
  Fnv1a h;
  h.add(to_config_text(vc.raw()));
  h.add(w.name);
  h.add_u64(w.seed);
  h.add_u64(w.placements.size());
  for (const auto& p : w.placements) {
    h.add_u64(static_cast<std::uint64_t>(p.device.kind));
    h.add_u64(p.device.gpu);
    h.add_u64(p.vaddr);
    h.add_u64(p.size);
  }
  h.add_u64(w.records.size());
  for (const auto& r : w.records) {
    h.add_u64(static_cast<std::uint64_t>(r.device.kind) | std::uint64_t{r.device.gpu} << 8 |
              std::uint64_t{r.device.index} << 32);
    h.add_u64(static_cast<std::uint64_t>(r.op));
    h.add_u64(r.vaddr);
    h.add_u64(r.size);
    h.add_u64(r.src);
    h.add_u64(r.dep ? *r.dep + 1 : 0);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

struct SimulationOptions {
  /// Record per-record issue and completion times (for dependency checks).
  bool record_timeline = false;
  /// Keep per-link occupancy intervals (for throughput checks).
  bool link_occupancy_log = false;
};

class Simulation {
 public:
  Simulation(const ValidatedConfig& cfg, const Workload& workload, SimulationOptions opts = {})
      : cfg_(cfg),
        c_(cfg.raw()),
        wl_(workload),
        opts_(opts),
        topo_(build_topology(cfg)),
        net_(topo_),
        router_(topo_),
        pages_(cfg),
        line_bytes_(c_.cacheline_bytes),
        cycle_(cfg.cu_cycle()),
        l1_hit_(from_ns(c_.l1_hit_ns)),
        l2_hit_(from_ns(c_.l2_hit_ns)),
        cpu_hit_(from_ns(c_.cpu_cache_hit_ns)),
        tlb_miss_(from_ns(c_.tlb_miss_ns)),
        compute_(from_ns(c_.compute_ns_per_record)) {
    validate_workload(workload, nullptr);
    GeneratorContext ctx = GeneratorContext::from(cfg);
    validate_workload(workload, &ctx);
    net_.enable_occupancy_log(opts.link_occupancy_log);

    const SimTime dram_lat = from_ns(c_.dram_access_ns);
    banks_.reserve(topo_.num_dram_banks());
    for (std::uint32_t k = 0; k < topo_.num_dram_banks(); ++k)
      banks_.emplace_back(cfg.dram_bank_bytes(), dram_lat, cfg.dram_bank_bw(), c_.dram_latency_occupies_bank);

    const CacheGeometry l1g{std::uint64_t{c_.l1_vector_kb} * 1024, c_.l1_vector_assoc, line_bytes_,
                            WritePolicy::WriteThroughNoAllocate};
    l2_bank_bits_ = static_cast<std::uint32_t>(std::countr_zero(c_.l2_banks_per_gpu));
    const CacheGeometry l2g{std::uint64_t{c_.l2_bank_kb} * 1024, c_.l2_assoc, line_bytes_,
                            WritePolicy::WriteBack, l2_bank_bits_};
    const CacheGeometry cpug{std::uint64_t{c_.cpu_cache_kb} * 1024, c_.cpu_cache_assoc, line_bytes_,
                             WritePolicy::WriteThroughNoAllocate};
    for (std::uint32_t g = 0; g < c_.num_gpus; ++g) {
      for (std::uint32_t i = 0; i < c_.l1_vector_count; ++i) l1_.emplace_back(l1g);
      for (std::uint32_t i = 0; i < c_.l1_tlb_count; ++i) l1_tlb_.emplace_back(TlbGeometry{c_.l1_tlb_sets, c_.l1_tlb_ways});
      l2_tlb_.emplace_back(TlbGeometry{c_.l2_tlb_sets, c_.l2_tlb_ways});
      for (std::uint32_t b = 0; b < c_.l2_banks_per_gpu; ++b) l2_.emplace_back(l2g);
    }
    cpu_cache_.emplace(cpug);
    fault_free_.assign(c_.num_gpus + 1, SimTime{});

    issue_comp_ = kernel_.add_component("issue", [this](const Event& e) { on_issue(e); });
    l2_comp_ = kernel_.add_component("l2", [this](const Event& e) { on_l2(e); });
    mem_comp_ = kernel_.add_component("memory", [this](const Event& e) { on_stage(e); });
    done_comp_ = kernel_.add_component("complete", [this](const Event& e) { on_complete(e); });
    pager_comp_ = kernel_.add_component("pager", [this](const Event& e) { on_retry(e); });

    build_units();
  }

  /// Runs to completion and returns the report. Call once.
  StatsReport run() {
    if (ran_) fail(ErrorCategory::Integrity, "simulation already ran");
    ran_ = true;
    for (const auto& p : wl_.placements) apply_placement(p);
    advance_phases(SimTime{});
    for (std::uint32_t u = 0; u < units_.size(); ++u) wake(u, SimTime{});
    const SimTime end = kernel_.run_to_completion();
    for (std::size_t i = 0; i < done_.size(); ++i) {
      if (!done_[i]) fail(ErrorCategory::Integrity, "record " + std::to_string(i) + " never completed");
    }
    if (kernel_.queue().popped_count() != kernel_.queue().scheduled_count())
      fail(ErrorCategory::Integrity, "event conservation violated");
    counters_.events = kernel_.queue().popped_count();
    counters_.migrations = migrations_;

    StatsReport r;
    r.mode = c_.mode;
    r.workload = wl_.name;
    r.fingerprint = config_fingerprint(cfg_, wl_);
    r.sim_time_ps = end.count();
    r.counters = counters_;
    for (std::uint32_t l = 0; l < topo_.links().size(); ++l) {
      const auto& spec = topo_.links()[l];
      r.links.push_back({spec.name, spec.offchip, spec.bw_bytes_per_sec, net_.stats(l, 0), net_.stats(l, 1)});
    }
    return r;
  }

  const Topology& topology() const { return topo_; }
  const Network& network() const { return net_; }
  const PageTable& page_table() const { return pages_; }
  EventKernel& kernel() { return kernel_; }

  /// Valid with SimulationOptions::record_timeline.
  const std::vector<SimTime>& record_issue_times() const { return issue_time_; }
  const std::vector<SimTime>& record_done_times() const { return done_time_; }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  enum class UnitKind : std::uint8_t { Cu, Cpu, CopyEngine };

  struct Unit {
    UnitKind kind = UnitKind::Cu;
    DeviceId dev;
    std::vector<std::uint32_t> records;
    std::size_t head = 0;
    std::uint64_t head_offset = 0;  // bytes of the head record already issued
    bool head_started = false;
    std::uint32_t outstanding = 0;
    std::uint32_t window = 1;
    SimTime next_issue;
    bool issue_pending = false;
  };

  enum class ReqKind : std::uint8_t { Line, CopyChunk };

  struct Request {
    ReqKind kind = ReqKind::Line;
    std::uint32_t record = 0;
    std::uint32_t unit = 0;
    Op op = Op::Read;
    std::uint64_t vaddr = 0;
    std::uint64_t bytes = 0;
    std::uint64_t paddr = 0;
    std::uint32_t bank = 0;
    std::uint32_t l2 = kNone;  // global L2 bank index used
    bool remote = false;
    bool fill_l1 = false;
    bool fill_l2 = false;
  };

  enum class JobKind : std::uint8_t { Demand, Writeback, Copy, Migration };

  struct Job {
    JobKind kind = JobKind::Demand;
    std::uint32_t ref = 0;  // request index, or page waiter slot for migrations
    std::uint64_t bytes = 0;
    const Path* path = nullptr;
    std::uint32_t pre_bank = kNone;
    std::uint32_t post_bank = kNone;
    std::uint32_t stage = 0;  // 0: pre-bank, 1..hops: hops, hops+1: post-bank, then done
    std::uint64_t vpn = 0;
  };

  enum EventKind : std::uint32_t { kIssue, kL2, kStage, kComplete, kRetry };

  // ------------------------------------------------------------ setup

  std::uint32_t cu_unit(const DeviceId& d) const {
    return d.kind == DeviceKind::Cpu ? cpu_unit_ : d.gpu * c_.cus_per_gpu + d.index;
  }
  std::uint32_t copy_unit(const DeviceId& d) const {
    return copy_base_ + (d.kind == DeviceKind::Cpu ? c_.num_gpus : d.gpu);
  }

  void build_units() {
    const std::uint32_t cus = c_.num_gpus * c_.cus_per_gpu;
    units_.resize(cus + 1 + c_.num_gpus + 1);
    for (std::uint32_t g = 0; g < c_.num_gpus; ++g) {
      for (std::uint32_t cu = 0; cu < c_.cus_per_gpu; ++cu) {
        Unit& u = units_[g * c_.cus_per_gpu + cu];
        u.kind = UnitKind::Cu;
        u.dev = gpu_cu(g, cu);
        u.window = c_.max_outstanding_per_cu;
      }
    }
    cpu_unit_ = cus;
    units_[cpu_unit_].kind = UnitKind::Cpu;
    units_[cpu_unit_].dev = DeviceId::cpu();
    units_[cpu_unit_].window = c_.cpu_max_outstanding;
    copy_base_ = cus + 1;
    for (std::uint32_t d = 0; d <= c_.num_gpus; ++d) {
      Unit& u = units_[copy_base_ + d];
      u.kind = UnitKind::CopyEngine;
      u.dev = d == c_.num_gpus ? DeviceId::cpu() : gpu_cu(d, 0);
      u.window = 1;
    }

    const std::size_t n = wl_.records.size();
    done_.assign(n, false);
    remaining_.assign(n, 0);
    phase_.assign(n, 0);
    if (opts_.record_timeline) {
      issue_time_.assign(n, SimTime::max());
      done_time_.assign(n, SimTime::max());
    }
    std::uint32_t phase = 0;
    phase_pending_.assign(1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = wl_.records[i];
      phase_[i] = phase;
      if (r.op == Op::Barrier) {
        barrier_of_phase_.push_back(static_cast<std::uint32_t>(i));
        ++phase;
        phase_pending_.push_back(0);
        continue;
      }
      ++phase_pending_[phase];
      const std::uint32_t u = r.op == Op::Copy ? copy_unit(r.device) : cu_unit(r.device);
      units_[u].records.push_back(static_cast<std::uint32_t>(i));
    }
  }

  void apply_placement(const Placement& p) {
    const auto page = pages_.page_bytes();
    for (std::uint64_t vpn = p.vaddr / page; vpn * page < p.vaddr + p.size; ++vpn) {
      if (pages_.find(vpn) == nullptr) pages_.place_page(vpn, p.device, SimTime{});
    }
  }

  // ---------------------------------------------------------- phases

  void advance_phases(SimTime now) {
    bool moved = false;
    while (current_phase_ + 1 < phase_pending_.size() && phase_pending_[current_phase_] == 0) {
      const auto b = barrier_of_phase_[current_phase_];
      mark_done(b, now);
      ++current_phase_;
      moved = true;
    }
    if (moved) {
      for (std::uint32_t u = 0; u < units_.size(); ++u) wake(u, now);
    }
  }

  void mark_done(std::uint32_t rec, SimTime now) {
    done_[rec] = true;
    if (opts_.record_timeline) {
      done_time_[rec] = now;
      if (issue_time_[rec] == SimTime::max()) issue_time_[rec] = now;
    }
    if (auto it = dep_waiters_.find(rec); it != dep_waiters_.end()) {
      for (auto u : it->second) wake(u, now);
      dep_waiters_.erase(it);
    }
  }

  void record_done(std::uint32_t rec, SimTime now) {
    mark_done(rec, now);
    if (--phase_pending_[phase_[rec]] == 0) advance_phases(now);
  }

  // ----------------------------------------------------------- issue

  void wake(std::uint32_t u, SimTime now) {
    Unit& unit = units_[u];
    if (unit.issue_pending || unit.head >= unit.records.size()) return;
    unit.issue_pending = true;
    kernel_.schedule(max(now, unit.next_issue), issue_comp_, kIssue, u);
  }

  void on_issue(const Event& e) {
    const auto u = static_cast<std::uint32_t>(e.ref);
    Unit& unit = units_[u];
    unit.issue_pending = false;
    const SimTime now = e.time;
    if (unit.head >= unit.records.size()) return;
    const std::uint32_t rec = unit.records[unit.head];
    const TraceRecord& r = wl_.records[rec];
    if (phase_[rec] > current_phase_) return;  // woken by advance_phases
    if (r.dep && !done_[*r.dep]) {
      dep_waiters_[static_cast<std::uint32_t>(*r.dep)].push_back(u);
      return;
    }
    if (unit.outstanding >= unit.window) return;  // woken on completion
    if (!unit.head_started) {
      unit.head_started = true;
      if (opts_.record_timeline) issue_time_[rec] = now;
      if (compute_ > SimTime{}) {
        unit.next_issue = max(unit.next_issue, now + compute_);
      }
    }
    if (now < unit.next_issue) {
      unit.issue_pending = true;
      kernel_.schedule(unit.next_issue, issue_comp_, kIssue, u);
      return;
    }

    if (r.op == Op::Copy) {
      start_copy(u, rec, now);
      advance_head(unit);
    } else {
      const std::uint64_t addr = r.vaddr + unit.head_offset;
      const std::uint64_t line_end = (addr / line_bytes_ + 1) * line_bytes_;
      const std::uint64_t bytes = std::min(line_end, r.vaddr + r.size) - addr;
      if (unit.head_offset == 0) {
        remaining_[rec] = static_cast<std::uint32_t>(
            (r.vaddr + r.size - 1) / line_bytes_ - r.vaddr / line_bytes_ + 1);
      }
      unit.head_offset += bytes;
      ++unit.outstanding;
      if (r.op == Op::Read) {
        counters_.read_bytes += bytes;
      } else {
        counters_.write_bytes += bytes;
      }
      counters_.bytes_issued += bytes;
      const auto req = new_request();
      Request& q = reqs_[req];
      q.kind = ReqKind::Line;
      q.record = rec;
      q.unit = u;
      q.op = r.op;
      q.vaddr = addr;
      q.bytes = bytes;
      if (unit.head_offset >= r.size) advance_head(unit);
      unit.next_issue = now + cycle_;
      issue_line(req, now);
    }
    wake(u, now);
  }

  static void advance_head(Unit& unit) {
    ++unit.head;
    unit.head_offset = 0;
    unit.head_started = false;
  }

  /// Resolves the page for a request; returns false when the request now
  /// waits on a page fault.
  bool resolve(std::uint32_t req, const DeviceId& dev, SimTime now) {
    Request& q = reqs_[req];
    const std::uint64_t vpn = pages_.vpn_of(q.vaddr);
    if (auto it = page_waiters_.find(vpn); it != page_waiters_.end()) {
      it->second.push_back(req);
      return false;
    }
    Translation tr = pages_.translate(q.vaddr, dev, now);
    if (!tr.mapped) {
      ++counters_.page_faults;
      pages_.place_page(vpn, dev, now);
      tr = pages_.translate(q.vaddr, dev, now);
    }
    if (tr.remote_fault && !c_.um_remote_map) {
      ++counters_.page_faults;
      start_migration(vpn, dev, now);
      page_waiters_[vpn].push_back(req);
      return false;
    }
    q.paddr = tr.location.paddr;
    q.bank = tr.location.bank;
    q.remote = tr.remote;
    return true;
  }

  void issue_line(std::uint32_t req, SimTime now) {
    Request& q0 = reqs_[req];
    const Unit& unit = units_[q0.unit];
    if (!resolve(req, unit.dev, now)) return;
    Request& q = reqs_[req];

    if (unit.kind == UnitKind::Cpu) {
      const SimTime t = now + cpu_hit_;
      const bool hit = cpu_cache_->lookup(q.paddr, q.op == Op::Read ? AccessKind::Read : AccessKind::Write);
      if (hit) {
        ++counters_.cpu_cache_hits;
      } else {
        ++counters_.cpu_cache_misses;
      }
      if (q.op == Op::Read && hit) {
        kernel_.schedule(t, done_comp_, kComplete, req);
        return;
      }
      q.fill_l1 = q.op == Op::Read;
      start_demand(req, topo_.cpu_node(), t);
      return;
    }

    const std::uint32_t g = unit.dev.gpu;
    const std::uint32_t cu = unit.dev.index;
    SimTime t = now;
    const std::uint64_t vpn = pages_.vpn_of(q.vaddr);
    if (!l1_tlb_[g * c_.l1_tlb_count + cu % c_.l1_tlb_count].access(vpn)) {
      ++counters_.l1_tlb_misses;
      if (!l2_tlb_[g].access(vpn)) {
        ++counters_.tlb_misses;
        t += tlb_miss_;
      }
    }
    t += l1_hit_;
    Cache& l1 = l1_[g * c_.l1_vector_count + cu % c_.l1_vector_count];
    const bool hit = l1.lookup(q.paddr, q.op == Op::Read ? AccessKind::Read : AccessKind::Write);
    if (hit) {
      ++counters_.l1_hits;
    } else {
      ++counters_.l1_misses;
    }
    if (q.op == Op::Read && hit) {
      kernel_.schedule(t, done_comp_, kComplete, req);
      return;
    }
    q.fill_l1 = q.op == Op::Read;
    q.l2 = g * c_.l2_banks_per_gpu + l2_bank_of(q.paddr);
    kernel_.schedule(t, l2_comp_, kL2, req);
  }

  void on_l2(const Event& e) {
    const auto req = static_cast<std::uint32_t>(e.ref);
    Request& q = reqs_[req];
    const SimTime t = e.time + l2_hit_;
    const std::uint32_t g = q.l2 / c_.l2_banks_per_gpu;
    const std::uint32_t node = topo_.l2_node(g, q.l2 % c_.l2_banks_per_gpu);
    if (q.remote) {  // remote data is cached in L1 only
      start_demand(req, node, t);
      return;
    }
    Cache& l2 = l2_[q.l2];
    if (q.op == Op::Read) {
      if (l2.lookup(q.paddr, AccessKind::Read)) {
        ++counters_.l2_hits;
        kernel_.schedule(t, done_comp_, kComplete, req);
        return;
      }
      ++counters_.l2_misses;
      const std::uint64_t key = mshr_key(q.l2, q.paddr);
      if (auto it = l2_mshr_.find(key); it != l2_mshr_.end()) {
        ++counters_.l2_mshr_merges;
        it->second.push_back(req);
        return;
      }
      l2_mshr_.emplace(key, std::vector<std::uint32_t>{});
      q.fill_l2 = true;
      start_demand(req, node, t);
      return;
    }
    if (l2.lookup(q.paddr, AccessKind::Write)) {
      ++counters_.l2_hits;
    } else {
      ++counters_.l2_misses;
      install_l2(q.l2, q.paddr, true, e.time);
    }
    kernel_.schedule(t, done_comp_, kComplete, req);
  }

  /// L2 bank of a physical address: XOR-fold of the line number in
  /// bank-select-width chunks, so power-of-two strides spread over all banks.
  std::uint32_t l2_bank_of(std::uint64_t paddr) const {
    if (l2_bank_bits_ == 0) return 0;
    std::uint64_t line = paddr / line_bytes_;
    std::uint64_t h = 0;
    for (; line != 0; line >>= l2_bank_bits_) h ^= line;
    return static_cast<std::uint32_t>(h & (c_.l2_banks_per_gpu - 1));
  }

  std::uint64_t mshr_key(std::uint32_t l2_index, std::uint64_t paddr) const {
    return paddr / line_bytes_ * l2_.size() + l2_index;
  }

  void install_l2(std::uint32_t l2_index, std::uint64_t paddr, bool dirty, SimTime now) {
    const auto victim = l2_[l2_index].fill(paddr, dirty);
    if (!victim || !victim->dirty) return;
    ++counters_.writebacks;
    const std::uint64_t line_addr = l2_[l2_index].line_address(victim->key);
    const auto bank = pages_.bank_of_ppn(line_addr / pages_.page_bytes());
    const std::uint32_t g = l2_index / c_.l2_banks_per_gpu;
    Job j;
    j.kind = JobKind::Writeback;
    j.bytes = line_bytes_;
    j.path = &router_.path(topo_.l2_node(g, l2_index % c_.l2_banks_per_gpu), topo_.dram_node(bank));
    j.post_bank = bank;
    start_job(j, now);
  }

  /// Memory access for a line leaving `from_node` (an L2 bank or the CPU).
  void start_demand(std::uint32_t req, std::uint32_t from_node, SimTime t) {
    Request& q = reqs_[req];
    Job j;
    j.kind = JobKind::Demand;
    j.ref = req;
    j.bytes = q.bytes;
    if (q.op == Op::Read) {
      j.path = &router_.path(topo_.dram_node(q.bank), from_node);
      j.pre_bank = q.bank;
    } else {
      j.path = &router_.path(from_node, topo_.dram_node(q.bank));
      j.post_bank = q.bank;
    }
    if (offchip_hops(topo_, *j.path) > 0) {
      ++counters_.remote_accesses;
      counters_.remote_bytes += q.bytes;
    }
    start_job(j, t);
  }

  // ----------------------------------------------------------- copies

  void start_copy(std::uint32_t u, std::uint32_t rec, SimTime now) {
    const TraceRecord& r = wl_.records[rec];
    Unit& unit = units_[u];
    ++unit.outstanding;
    counters_.copy_bytes += r.size;
    counters_.bytes_issued += r.size;
    const std::uint64_t page = pages_.page_bytes();
    std::uint32_t chunks = 0;
    for (std::uint64_t off = 0; off < r.size;) {
      const std::uint64_t s = r.src + off;
      const std::uint64_t d = r.vaddr + off;
      const std::uint64_t len = std::min({page - s % page, page - d % page, r.size - off});
      const Location src = locate_for_copy(s, r.device, now);
      const Location dst = locate_for_copy(d, r.device, now);
      const auto req = new_request();
      Request& q = reqs_[req];
      q.kind = ReqKind::CopyChunk;
      q.record = rec;
      q.unit = u;
      q.op = Op::Copy;
      q.bytes = len;
      Job j;
      j.kind = JobKind::Copy;
      j.ref = req;
      j.bytes = len;
      j.path = &router_.path(topo_.dram_node(src.bank), topo_.dram_node(dst.bank));
      j.pre_bank = src.bank;
      j.post_bank = dst.bank;
      start_job(j, now);
      ++chunks;
      off += len;
    }
    remaining_[rec] = chunks;
  }

  Location locate_for_copy(std::uint64_t vaddr, const DeviceId& dev, SimTime now) {
    const std::uint64_t vpn = pages_.vpn_of(vaddr);
    if (pages_.find(vpn) == nullptr) {
      ++counters_.page_faults;
      pages_.place_page(vpn, dev, now);
    }
    return pages_.translate(vaddr, dev, now).location;
  }

  // -------------------------------------------------------- migration

  void start_migration(std::uint64_t vpn, const DeviceId& dev, SimTime now) {
    const MigrationJob mj = pages_.migrate_page(vpn, dev, now);
    ++migrations_;
    SimTime& handler = fault_free_[std::min<std::uint32_t>(island_of(dev), c_.num_gpus)];
    const SimTime start = max(now, handler) + mj.fault_overhead;
    handler = start;
    Job j;
    j.kind = JobKind::Migration;
    j.vpn = vpn;
    j.bytes = mj.bytes;
    j.path = &router_.path(topo_.dram_node(mj.from_bank), topo_.dram_node(mj.to_bank));
    j.pre_bank = mj.from_bank;
    j.post_bank = mj.to_bank;
    start_job(j, start);
  }

  void on_retry(const Event& e) {
    const auto req = static_cast<std::uint32_t>(e.ref);
    issue_line(req, e.time);
  }

  // ------------------------------------------------------------- jobs

  void start_job(const Job& j, SimTime t) {
    std::uint32_t id;
    if (!free_jobs_.empty()) {
      id = free_jobs_.back();
      free_jobs_.pop_back();
      jobs_[id] = j;
    } else {
      id = static_cast<std::uint32_t>(jobs_.size());
      jobs_.push_back(j);
    }
    kernel_.schedule(t, mem_comp_, kStage, id);
  }

  void on_stage(const Event& e) {
    const auto id = static_cast<std::uint32_t>(e.ref);
    Job& j = jobs_[id];
    const std::uint32_t hops = static_cast<std::uint32_t>(j.path->hops.size());
    SimTime t = e.time;
    if (j.stage == 0) {
      j.stage = 1;
      if (j.pre_bank != kNone) {
        ++counters_.dram_accesses;
        t = banks_[j.pre_bank].service(j.bytes, t);
        if (t != e.time) {
          kernel_.schedule(t, mem_comp_, kStage, id);
          return;
        }
      }
    }
    if (j.stage <= hops) {
      const Hop& h = j.path->hops[j.stage - 1];
      const LinkSpec& spec = topo_.links()[h.link];
      if (spec.offchip) {
        counters_.bytes_on_offchip_links += j.bytes;
      } else {
        counters_.bytes_on_switch_links += j.bytes;
      }
      if (spec.l2_port) counters_.bytes_l2_mm += j.bytes;
      t = net_.traverse(h, j.bytes, t);
      ++j.stage;
      kernel_.schedule(t, mem_comp_, kStage, id);
      return;
    }
    if (j.stage == hops + 1) {
      j.stage = hops + 2;
      if (j.post_bank != kNone) {
        ++counters_.dram_accesses;
        t = banks_[j.post_bank].service(j.bytes, t);
        kernel_.schedule(t, mem_comp_, kStage, id);
        return;
      }
    }
    const Job done = j;
    free_jobs_.push_back(id);
    finish_job(done, t);
  }

  void finish_job(const Job& j, SimTime now) {
    switch (j.kind) {
      case JobKind::Writeback: return;
      case JobKind::Demand: complete_request(j.ref, now); return;
      case JobKind::Copy: {
        const Request q = reqs_[j.ref];
        free_request(j.ref);
        if (--remaining_[q.record] == 0) {
          --units_[q.unit].outstanding;
          record_done(q.record, now);
          wake(q.unit, now);
        }
        return;
      }
      case JobKind::Migration: {
        auto it = page_waiters_.find(j.vpn);
        if (it == page_waiters_.end()) return;
        const std::vector<std::uint32_t> waiters = std::move(it->second);
        page_waiters_.erase(it);
        for (auto req : waiters) kernel_.schedule(now, pager_comp_, kRetry, req);
        return;
      }
    }
  }

  // ------------------------------------------------------- completion

  void on_complete(const Event& e) { complete_request(static_cast<std::uint32_t>(e.ref), e.time); }

  void complete_request(std::uint32_t req, SimTime now) {
    const Request q = reqs_[req];
    free_request(req);
    Unit& unit = units_[q.unit];
    if (q.fill_l2) {
      install_l2(q.l2, q.paddr, false, now);
      auto it = l2_mshr_.find(mshr_key(q.l2, q.paddr));
      for (auto w : it->second) kernel_.schedule(now, done_comp_, kComplete, w);
      l2_mshr_.erase(it);
    }
    if (q.fill_l1) {
      if (unit.kind == UnitKind::Cpu) {
        cpu_cache_->fill(q.paddr, false);
      } else {
        l1_[unit.dev.gpu * c_.l1_vector_count + unit.dev.index % c_.l1_vector_count].fill(q.paddr, false);
      }
    }
    --unit.outstanding;
    if (--remaining_[q.record] == 0) record_done(q.record, now);
    wake(q.unit, now);
  }

  std::uint32_t new_request() {
    if (!free_reqs_.empty()) {
      const auto id = free_reqs_.back();
      free_reqs_.pop_back();
      reqs_[id] = Request{};
      return id;
    }
    reqs_.emplace_back();
    return static_cast<std::uint32_t>(reqs_.size() - 1);
  }

  void free_request(std::uint32_t id) { free_reqs_.push_back(id); }

  // ------------------------------------------------------------ state

  ValidatedConfig cfg_;
  const SystemConfig& c_;
  const Workload& wl_;
  SimulationOptions opts_;
  Topology topo_;
  Network net_;
  Router router_;
  PageTable pages_;
  std::vector<DramBank> banks_;
  std::vector<Cache> l1_;
  std::vector<Tlb> l1_tlb_;
  std::vector<Tlb> l2_tlb_;
  std::vector<Cache> l2_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> l2_mshr_;  // pending line fills
  std::optional<Cache> cpu_cache_;

  std::uint32_t line_bytes_;
  std::uint32_t l2_bank_bits_ = 0;
  SimTime cycle_, l1_hit_, l2_hit_, cpu_hit_, tlb_miss_, compute_;

  EventKernel kernel_;
  ComponentId issue_comp_, l2_comp_, mem_comp_, done_comp_, pager_comp_;

  std::vector<Unit> units_;
  std::uint32_t cpu_unit_ = 0;
  std::uint32_t copy_base_ = 0;

  std::vector<bool> done_;
  std::vector<std::uint32_t> remaining_;
  std::vector<std::uint32_t> phase_;
  std::vector<std::uint64_t> phase_pending_;
  std::vector<std::uint32_t> barrier_of_phase_;
  std::size_t current_phase_ = 0;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> dep_waiters_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> page_waiters_;
  std::vector<SimTime> fault_free_;
  std::vector<SimTime> issue_time_;
  std::vector<SimTime> done_time_;

  std::vector<Request> reqs_;
  std::vector<std::uint32_t> free_reqs_;
  std::vector<Job> jobs_;
  std::vector<std::uint32_t> free_jobs_;

  Counters counters_;
  std::uint64_t migrations_ = 0;
  bool ran_ = false;
};

/// Runs one configuration against one workload.
inline StatsReport simulate(const ValidatedConfig& cfg, const Workload& w, SimulationOptions opts = {}) {
  Simulation sim(cfg, w, opts);
  return sim.run();
}

}  // namespace mgpusim

#pragma once

// Flat virtual address space shared by all devices, mapped onto DRAM frames
// under the placement policy fixed by the memory organization:
//   TSM  -> InterleavedRR: consecutive placements go to consecutive banks
//           (one global counter across all banks).
//   RDMA -> LocalOwner:    the first-touching device's island, round-robin
//           over that island's banks.
//   UM   -> FirstTouch:    as LocalOwner, plus ownership that moves with
//           migrations (exclusive; no read duplication).

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgpusim/config.hpp"
#include "mgpusim/topology.hpp"

namespace mgpusim {

enum class PlacementKind { InterleavedRR, LocalOwner, FirstTouch };

constexpr PlacementKind policy_for(Mode m) {
  switch (m) {
    case Mode::TSM: return PlacementKind::InterleavedRR;
    case Mode::RDMA: return PlacementKind::LocalOwner;
    case Mode::UM: return PlacementKind::FirstTouch;
  }
  return PlacementKind::InterleavedRR;
}

/// Island of a requesting device: its GPU index, or kHostIsland for the CPU.
inline std::uint32_t island_of(const DeviceId& requester) {
  return requester.kind == DeviceKind::Cpu ? kHostIsland : requester.gpu;
}

inline DeviceId device_of_island(std::uint32_t island) {
  return island == kHostIsland ? DeviceId::cpu() : DeviceId::gpu_dev(island);
}

struct PageTableEntry {
  std::uint64_t vpn = 0;
  std::uint64_t ppn = 0;
  std::uint32_t home_bank = 0;
  DeviceId owner;
  SimTime placement_time;
  std::uint32_t migration_count = 0;
};

struct Location {
  std::uint32_t bank = 0;
  std::uint64_t paddr = 0;
};

struct Translation {
  bool mapped = false;       // false: page fault (first touch)
  bool remote = false;       // home bank lies outside the requester's island
  bool remote_fault = false; // UM: owned by another device, needs service
  std::uint64_t vpn = 0;
  Location location;         // valid when mapped
  DeviceId owner;            // current owner when mapped
};

struct MigrationJob {
  std::uint64_t vpn = 0;
  std::uint32_t from_bank = 0;
  std::uint64_t from_paddr = 0;
  std::uint32_t to_bank = 0;
  std::uint64_t to_paddr = 0;
  std::uint64_t bytes = 0;
  SimTime fault_overhead;
};

class PageTable {
 public:
  explicit PageTable(const ValidatedConfig& vc)
      : mode_(vc.mode()),
        policy_(policy_for(vc.mode())),
        page_bytes_(vc->page_size_bytes),
        frames_per_bank_(vc.frames_per_bank()),
        banks_per_gpu_(vc->dram_banks_per_gpu),
        gpu_banks_(vc.gpu_dram_banks()),
        host_banks_(vc.mode() == Mode::TSM ? 0 : vc->host_dram_banks),
        fault_overhead_(from_ns(vc->um_fault_overhead_ns)),
        banks_(vc.total_dram_banks()),
        island_rr_(vc->num_gpus + 1, 0) {}

  PlacementKind policy() const { return policy_; }
  std::uint64_t page_bytes() const { return page_bytes_; }
  std::uint64_t vpn_of(std::uint64_t vaddr) const { return vaddr / page_bytes_; }

  /// Island a DRAM bank belongs to (HBM stack index in TSM).
  std::uint32_t bank_island(std::uint32_t bank) const {
    return bank < gpu_banks_ ? bank / banks_per_gpu_ : kHostIsland;
  }

  Translation translate(std::uint64_t vaddr, const DeviceId& requester, SimTime /*t*/) const {
    Translation tr;
    tr.vpn = vpn_of(vaddr);
    auto it = table_.find(tr.vpn);
    if (it == table_.end()) return tr;
    const PageTableEntry& e = it->second;
    tr.mapped = true;
    tr.owner = e.owner;
    tr.location = {e.home_bank, e.ppn * page_bytes_ + vaddr % page_bytes_};
    if (mode_ != Mode::TSM) {
      tr.remote = bank_island(e.home_bank) != island_of(requester);
      tr.remote_fault = mode_ == Mode::UM && island_of(e.owner) != island_of(requester);
    }
    return tr;
  }

  const PageTableEntry* find(std::uint64_t vpn) const {
    auto it = table_.find(vpn);
    return it == table_.end() ? nullptr : &it->second;
  }

  /// Maps an unmapped page according to the policy.
  const PageTableEntry& place_page(std::uint64_t vpn, const DeviceId& requester, SimTime t) {
    if (table_.contains(vpn))
      fail(ErrorCategory::Integrity, "page " + std::to_string(vpn) + " is already mapped");
    PageTableEntry e;
    e.vpn = vpn;
    e.owner = device_of_island(island_of(requester));
    e.placement_time = t;
    if (policy_ == PlacementKind::InterleavedRR) {
      const auto total = static_cast<std::uint32_t>(banks_.size());
      for (std::uint32_t tries = 0;; ++tries) {
        if (tries == total) fail(ErrorCategory::OutOfMemory, "physical memory exhausted");
        const auto bank = static_cast<std::uint32_t>(rr_counter_++ % total);
        if (auto f = alloc_frame(bank)) {
          e.home_bank = bank;
          e.ppn = *f;
          break;
        }
      }
    } else {
      const auto [bank, frame] = alloc_in_island(island_of(requester));
      e.home_bank = bank;
      e.ppn = frame;
    }
    return table_.emplace(vpn, e).first->second;
  }

  /// Moves a UM page into `new_owner`'s memory. The returned job describes
  /// the page copy the caller must time, after the fault overhead.
  MigrationJob migrate_page(std::uint64_t vpn, const DeviceId& new_owner, SimTime t) {
    if (mode_ != Mode::UM)
      fail(ErrorCategory::ModeViolation, "page migration requested outside UM mode");
    auto it = table_.find(vpn);
    if (it == table_.end())
      fail(ErrorCategory::Integrity, "migration of unmapped page " + std::to_string(vpn));
    PageTableEntry& e = it->second;
    if (island_of(e.owner) == island_of(new_owner))
      fail(ErrorCategory::Integrity, "migration of page " + std::to_string(vpn) + " to its owner");
    MigrationJob job;
    job.vpn = vpn;
    job.from_bank = e.home_bank;
    job.from_paddr = e.ppn * page_bytes_;
    const auto [bank, frame] = alloc_in_island(island_of(new_owner));
    free_frame(e.home_bank, e.ppn);
    e.home_bank = bank;
    e.ppn = frame;
    e.owner = device_of_island(island_of(new_owner));
    e.placement_time = t;
    ++e.migration_count;
    job.to_bank = bank;
    job.to_paddr = frame * page_bytes_;
    job.bytes = page_bytes_;
    job.fault_overhead = fault_overhead_;
    return job;
  }

  std::size_t mapped_pages() const { return table_.size(); }

  /// Physical pages interleave over all banks: ppn = frame * banks + bank.
  std::uint32_t bank_of_ppn(std::uint64_t ppn) const { return static_cast<std::uint32_t>(ppn % banks_.size()); }

  template <typename F>
  void for_each_entry(F&& f) const {
    for (const auto& [vpn, e] : table_) f(e);
  }

 private:
  struct BankFrames {
    std::uint64_t next = 0;           // bump pointer
    std::deque<std::uint64_t> freed;  // reused only after the bump region
  };

  std::optional<std::uint64_t> alloc_frame(std::uint32_t bank) {
    BankFrames& b = banks_[bank];
    if (b.next < frames_per_bank_) return b.next++ * banks_.size() + bank;
    if (!b.freed.empty()) {
      const auto f = b.freed.front();
      b.freed.pop_front();
      return f;
    }
    return std::nullopt;
  }

  void free_frame(std::uint32_t bank, std::uint64_t ppn) { banks_[bank].freed.push_back(ppn); }

  std::pair<std::uint32_t, std::uint64_t> alloc_in_island(std::uint32_t island) {
    std::uint32_t first = 0;
    std::uint32_t count = 0;
    std::uint32_t rr_slot = 0;
    if (island == kHostIsland) {
      if (host_banks_ == 0) {
        // TSM has no host memory; shared memory holds everything.
        first = 0;
        count = gpu_banks_;
      } else {
        first = gpu_banks_;
        count = host_banks_;
      }
      rr_slot = static_cast<std::uint32_t>(island_rr_.size() - 1);
    } else {
      first = island * banks_per_gpu_;
      count = banks_per_gpu_;
      rr_slot = island;
    }
    for (std::uint32_t tries = 0; tries < count; ++tries) {
      const auto bank = first + static_cast<std::uint32_t>(island_rr_[rr_slot]++ % count);
      if (auto f = alloc_frame(bank)) return {bank, *f};
    }
    fail(ErrorCategory::OutOfMemory,
         "memory of " + to_string(device_of_island(island)) + " exhausted");
  }

  Mode mode_;
  PlacementKind policy_;
  std::uint64_t page_bytes_;
  std::uint64_t frames_per_bank_;
  std::uint32_t banks_per_gpu_;
  std::uint32_t gpu_banks_;
  std::uint32_t host_banks_;
  SimTime fault_overhead_;
  std::vector<BankFrames> banks_;
  std::uint64_t rr_counter_ = 0;
  std::vector<std::uint64_t> island_rr_;
  std::unordered_map<std::uint64_t, PageTableEntry> table_;
};

}  // namespace mgpusim

#pragma once

// Set-associative LRU caches and TLBs.

#include <cstdint>
#include <optional>
#include <vector>

#include "mgpusim/config.hpp"

namespace mgpusim {

enum class WritePolicy { WriteThroughNoAllocate, WriteBack };
enum class AccessKind { Read, Write };

struct CacheGeometry {
  std::uint64_t capacity_bytes = 0;
  std::uint32_t associativity = 1;
  std::uint32_t line_bytes = 64;
  WritePolicy write_policy = WritePolicy::WriteBack;
  /// Low line-number bits skipped by the set index (bank-select bits of a
  /// banked cache, which are constant within one bank).
  std::uint32_t index_shift = 0;

  std::uint64_t sets() const { return capacity_bytes / (std::uint64_t{associativity} * line_bytes); }
};

struct TlbGeometry {
  std::uint32_t sets = 1;
  std::uint32_t ways = 1;
};

/// LRU-managed set-associative array of keys. The set index is taken from
/// the key bits above `index_shift`.
class LruArray {
 public:
  struct Way {
    std::uint64_t key = 0;
    std::uint64_t stamp = 0;
    bool valid = false;
    bool dirty = false;
  };

  struct Victim {
    std::uint64_t key;
    bool dirty;
  };

  LruArray(std::uint64_t sets, std::uint32_t ways, std::uint32_t index_shift = 0)
      : sets_(sets), ways_(ways), shift_(index_shift), slots_(sets * ways) {
    if (!is_power_of_two(sets) || ways == 0)
      fail(ErrorCategory::Config, "cache geometry: sets must be a power of two and ways >= 1");
  }

  /// Returns the way holding `key`, refreshing its recency when `touch`.
  Way* find(std::uint64_t key, bool touch = true) {
    for (auto& w : set_of(key)) {
      if (w.valid && w.key == key) {
        if (touch) w.stamp = ++clock_;
        return &w;
      }
    }
    return nullptr;
  }

  /// Inserts `key` (must be absent) as most recently used.
  std::optional<Victim> insert(std::uint64_t key, bool dirty) {
    auto ways = set_of(key);
    Way* slot = nullptr;
    for (auto& w : ways) {
      if (!w.valid) {
        slot = &w;
        break;
      }
      if (slot == nullptr || w.stamp < slot->stamp) slot = &w;
    }
    std::optional<Victim> victim;
    if (slot->valid) victim = Victim{slot->key, slot->dirty};
    *slot = Way{key, ++clock_, true, dirty};
    return victim;
  }

  std::uint64_t sets() const { return sets_; }
  std::uint32_t ways() const { return ways_; }

  /// Number of valid entries in the set `key` maps to.
  std::uint32_t occupancy_of_set(std::uint64_t key) const {
    std::uint32_t n = 0;
    const auto base = ((key >> shift_) & (sets_ - 1)) * ways_;
    for (std::uint32_t i = 0; i < ways_; ++i) n += slots_[base + i].valid ? 1 : 0;
    return n;
  }

 private:
  struct Span {
    Way* b;
    Way* e;
    Way* begin() const { return b; }
    Way* end() const { return e; }
  };
  Span set_of(std::uint64_t key) {
    Way* base = slots_.data() + ((key >> shift_) & (sets_ - 1)) * ways_;
    return {base, base + ways_};
  }

  std::uint64_t sets_;
  std::uint32_t ways_;
  std::uint32_t shift_;
  std::vector<Way> slots_;
  std::uint64_t clock_ = 0;
};

struct CacheResult {
  bool hit = false;
  /// Line address (byte address of the line start) that was evicted, if any.
  std::optional<std::uint64_t> evicted_line;
  bool evicted_dirty = false;
};

class Cache {
 public:
  explicit Cache(const CacheGeometry& g)
      : geom_(g), ways_(g.sets(), g.associativity, g.index_shift), line_shift_(log2(g.line_bytes)) {}

  const CacheGeometry& geometry() const { return geom_; }

  /// Full access: lookup plus allocation per the write policy.
  CacheResult access(std::uint64_t paddr, AccessKind kind) {
    CacheResult r;
    r.hit = lookup(paddr, kind);
    if (r.hit) return r;
    if (kind == AccessKind::Write && geom_.write_policy == WritePolicy::WriteThroughNoAllocate) return r;
    const auto v = fill(paddr, kind == AccessKind::Write);
    if (v) {
      r.evicted_line = v->key << line_shift_;
      r.evicted_dirty = v->dirty;
    }
    return r;
  }

  /// Lookup without allocation. A write hit on a write-back cache marks the
  /// line dirty.
  bool lookup(std::uint64_t paddr, AccessKind kind) {
    auto* w = ways_.find(paddr >> line_shift_);
    if (w == nullptr) return false;
    if (kind == AccessKind::Write && geom_.write_policy == WritePolicy::WriteBack) w->dirty = true;
    return true;
  }

  bool contains(std::uint64_t paddr) { return ways_.find(paddr >> line_shift_, false) != nullptr; }

  /// Installs the line holding `paddr` unless already present; returns the
  /// victim. Dirty fills are ignored on a write-through cache.
  std::optional<LruArray::Victim> fill(std::uint64_t paddr, bool dirty) {
    const auto key = paddr >> line_shift_;
    const bool keep_dirty = dirty && geom_.write_policy == WritePolicy::WriteBack;
    if (auto* w = ways_.find(key)) {
      w->dirty = w->dirty || keep_dirty;
      return std::nullopt;
    }
    return ways_.insert(key, keep_dirty);
  }

  std::uint64_t line_address(std::uint64_t line_key) const { return line_key << line_shift_; }

 private:
  static unsigned log2(std::uint32_t v) {
    unsigned s = 0;
    while ((1u << s) < v) ++s;
    return s;
  }

  CacheGeometry geom_;
  LruArray ways_;
  unsigned line_shift_;
};

class Tlb {
 public:
  explicit Tlb(const TlbGeometry& g) : ways_(g.sets, g.ways) {}

  /// Returns true on a hit; a miss installs the translation.
  bool access(std::uint64_t vpn) {
    if (ways_.find(vpn) != nullptr) return true;
    ways_.insert(vpn, false);
    return false;
  }

 private:
  LruArray ways_;
};

}  // namespace mgpusim

#pragma once

// System configuration: every architecture parameter of the simulated
// machine, a flat key=value file format for it, and validation.
//
// Units: sizes in the unit named by the key suffix (kb = KiB, mb = MiB),
// bandwidths in GB/s with GB = 1e9 bytes (per direction), latencies in ns.
// Latency defaults are calibration parameters; the architecture tables only
// fix geometries and bandwidths.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "mgpusim/error.hpp"
#include "mgpusim/sim_time.hpp"

namespace mgpusim {

enum class Mode { TSM, RDMA, UM };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::TSM: return "tsm";
    case Mode::RDMA: return "rdma";
    case Mode::UM: return "um";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "tsm" || s == "TSM") return Mode::TSM;
  if (s == "rdma" || s == "RDMA") return Mode::RDMA;
  if (s == "um" || s == "UM") return Mode::UM;
  fail(ErrorCategory::Config, "mode: unknown memory organization '" + std::string(s) +
                                  "' (expected tsm, rdma or um)");
}

struct SystemConfig {
  Mode mode = Mode::TSM;

  std::uint32_t num_gpus = 4;
  std::uint32_t cus_per_gpu = 32;
  double cu_clock_ghz = 1.0;

  std::uint32_t l1_vector_kb = 16;
  std::uint32_t l1_vector_assoc = 4;
  std::uint32_t l1_vector_count = 32;
  // Scalar and instruction caches are carried for completeness; data-access
  // workloads never touch them.
  std::uint32_t l1_scalar_kb = 16;
  std::uint32_t l1_scalar_assoc = 4;
  std::uint32_t l1_scalar_count = 8;
  std::uint32_t l1i_kb = 32;
  std::uint32_t l1i_assoc = 4;
  std::uint32_t l1i_count = 8;

  std::uint32_t l2_banks_per_gpu = 8;
  std::uint32_t l2_bank_kb = 256;
  std::uint32_t l2_assoc = 16;

  std::uint32_t dram_banks_per_gpu = 16;
  std::uint32_t dram_bank_mb = 512;
  // Host (CPU-attached) memory; exists only in RDMA and UM organizations.
  std::uint32_t host_dram_banks = 16;

  std::uint32_t l1_tlb_sets = 1;
  std::uint32_t l1_tlb_ways = 32;
  std::uint32_t l1_tlb_count = 48;
  std::uint32_t l2_tlb_sets = 32;
  std::uint32_t l2_tlb_ways = 16;

  std::uint32_t cpu_cache_kb = 1024;
  std::uint32_t cpu_cache_assoc = 16;

  std::uint32_t page_size_bytes = 4096;
  std::uint32_t cacheline_bytes = 64;

  double link_bw_gbps = 32.0;
  double offchip_bw_gbps = 32.0;
  double dram_bank_bw_gbps = 32.0;

  double l1_hit_ns = 1.0;
  double l2_hit_ns = 10.0;
  double cpu_cache_hit_ns = 2.0;
  double switch_hop_ns = 20.0;
  double dram_access_ns = 50.0;
  double offchip_hop_ns = 400.0;
  double tlb_miss_ns = 200.0;
  double um_fault_overhead_ns = 20000.0;
  double compute_ns_per_record = 0.0;

  std::uint32_t max_outstanding_per_cu = 16;
  std::uint32_t cpu_max_outstanding = 16;

  // UM: serve faults on pages owned elsewhere by direct remote access
  // instead of migrating the page.
  bool um_remote_map = false;
  // DRAM: when set, a bank stays busy for its access latency as well as the
  // data occupancy; otherwise the access latency is pipelined.
  bool dram_latency_occupies_bank = false;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// Visits every field as (key, reference). The order here is the canonical
/// order used by the config file writer and the fingerprint.
template <typename Cfg, typename F>
  requires std::is_same_v<std::remove_const_t<Cfg>, SystemConfig>
void for_each_field(Cfg& c, F&& f) {
  f("mode", c.mode);
  f("num_gpus", c.num_gpus);
  f("cus_per_gpu", c.cus_per_gpu);
  f("cu_clock_ghz", c.cu_clock_ghz);
  f("l1_vector_kb", c.l1_vector_kb);
  f("l1_vector_assoc", c.l1_vector_assoc);
  f("l1_vector_count", c.l1_vector_count);
  f("l1_scalar_kb", c.l1_scalar_kb);
  f("l1_scalar_assoc", c.l1_scalar_assoc);
  f("l1_scalar_count", c.l1_scalar_count);
  f("l1i_kb", c.l1i_kb);
  f("l1i_assoc", c.l1i_assoc);
  f("l1i_count", c.l1i_count);
  f("l2_banks_per_gpu", c.l2_banks_per_gpu);
  f("l2_bank_kb", c.l2_bank_kb);
  f("l2_assoc", c.l2_assoc);
  f("dram_banks_per_gpu", c.dram_banks_per_gpu);
  f("dram_bank_mb", c.dram_bank_mb);
  f("host_dram_banks", c.host_dram_banks);
  f("l1_tlb_sets", c.l1_tlb_sets);
  f("l1_tlb_ways", c.l1_tlb_ways);
  f("l1_tlb_count", c.l1_tlb_count);
  f("l2_tlb_sets", c.l2_tlb_sets);
  f("l2_tlb_ways", c.l2_tlb_ways);
  f("cpu_cache_kb", c.cpu_cache_kb);
  f("cpu_cache_assoc", c.cpu_cache_assoc);
  f("page_size_bytes", c.page_size_bytes);
  f("cacheline_bytes", c.cacheline_bytes);
  f("link_bw_gbps", c.link_bw_gbps);
  f("offchip_bw_gbps", c.offchip_bw_gbps);
  f("dram_bank_bw_gbps", c.dram_bank_bw_gbps);
  f("l1_hit_ns", c.l1_hit_ns);
  f("l2_hit_ns", c.l2_hit_ns);
  f("cpu_cache_hit_ns", c.cpu_cache_hit_ns);
  f("switch_hop_ns", c.switch_hop_ns);
  f("dram_access_ns", c.dram_access_ns);
  f("offchip_hop_ns", c.offchip_hop_ns);
  f("tlb_miss_ns", c.tlb_miss_ns);
  f("um_fault_overhead_ns", c.um_fault_overhead_ns);
  f("compute_ns_per_record", c.compute_ns_per_record);
  f("max_outstanding_per_cu", c.max_outstanding_per_cu);
  f("cpu_max_outstanding", c.cpu_max_outstanding);
  f("um_remote_map", c.um_remote_map);
  f("dram_latency_occupies_bank", c.dram_latency_occupies_bank);
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_value(Mode m) { return std::string(to_string(m)); }
inline std::string format_value(bool b) { return b ? "true" : "false"; }
inline std::string format_value(std::uint32_t v) { return std::to_string(v); }
inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void parse_value(std::string_view key, std::string_view text, Mode& out) {
  (void)key;
  out = parse_mode(text);
}

inline void parse_value(std::string_view key, std::string_view text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
  } else if (text == "false" || text == "0" || text == "no") {
    out = false;
  } else {
    fail(ErrorCategory::Config, std::string(key) + ": expected a boolean, got '" +
                                    std::string(text) + "'");
  }
}

inline void parse_value(std::string_view key, std::string_view text, std::uint32_t& out) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || v > UINT32_MAX) {
    fail(ErrorCategory::Config, std::string(key) + ": expected an unsigned integer, got '" +
                                    std::string(text) + "'");
  }
  out = static_cast<std::uint32_t>(v);
}

inline void parse_value(std::string_view key, std::string_view text, double& out) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    fail(ErrorCategory::Config, std::string(key) + ": expected a number, got '" + s + "'");
  }
  out = v;
}

}  // namespace detail

/// Sets one field from its textual value. Unknown keys are a config error.
inline void set_field(SystemConfig& cfg, std::string_view key, std::string_view value) {
  bool found = false;
  for_each_field(cfg, [&](std::string_view k, auto& ref) {
    if (k == key) {
      detail::parse_value(k, detail::trim(value), ref);
      found = true;
    }
  });
  if (!found) fail(ErrorCategory::Config, "unknown configuration key '" + std::string(key) + "'");
}

inline std::string get_field(const SystemConfig& cfg, std::string_view key) {
  std::string out;
  bool found = false;
  for_each_field(cfg, [&](std::string_view k, const auto& ref) {
    if (k == key) {
      out = detail::format_value(ref);
      found = true;
    }
  });
  if (!found) fail(ErrorCategory::Config, "unknown configuration key '" + std::string(key) + "'");
  return out;
}

/// Canonical key=value text, one field per line in declaration order.
inline std::string to_config_text(const SystemConfig& cfg) {
  std::string out;
  for_each_field(cfg, [&](std::string_view k, const auto& ref) {
    out.append(k);
    out.push_back('=');
    out.append(detail::format_value(ref));
    out.push_back('\n');
  });
  return out;
}

/// Parses the flat config format. Missing keys keep their defaults.
inline SystemConfig parse_config_text(std::string_view text) {
  SystemConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCategory::Config,
           "line " + std::to_string(line_no) + ": expected 'key = value', got '" + t + "'");
    }
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    try {
      set_field(cfg, key, value);
    } catch (const SimError& e) {
      fail(ErrorCategory::Config, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (nl == text.size()) break;
  }
  return cfg;
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::Io, path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const SimError& e) {
    fail(e.category(), path + ": " + e.what());
  }
}

inline SimTime from_ns(double ns) { return SimTime(std::llround(ns * 1000.0)); }

constexpr bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// A configuration that passed validation, with derived totals.
class ValidatedConfig {
 public:
  const SystemConfig& raw() const { return cfg_; }
  const SystemConfig* operator->() const { return &cfg_; }
  Mode mode() const { return cfg_.mode; }

  std::uint64_t dram_bank_bytes() const { return std::uint64_t{cfg_.dram_bank_mb} << 20; }
  /// GPU-attached (TSM: shared) main memory.
  std::uint64_t total_mm_bytes() const {
    return std::uint64_t{cfg_.num_gpus} * cfg_.dram_banks_per_gpu * dram_bank_bytes();
  }
  std::uint64_t host_mm_bytes() const {
    return cfg_.mode == Mode::TSM ? 0 : std::uint64_t{cfg_.host_dram_banks} * dram_bank_bytes();
  }
  /// Sum of all L2 port bandwidths, bytes/s per direction.
  double aggregate_l2_mm_bw() const {
    return static_cast<double>(cfg_.num_gpus) * cfg_.l2_banks_per_gpu * link_bw();
  }
  double link_bw() const { return cfg_.link_bw_gbps * 1e9; }
  double offchip_bw() const { return cfg_.offchip_bw_gbps * 1e9; }
  double dram_bank_bw() const { return cfg_.dram_bank_bw_gbps * 1e9; }
  std::uint64_t frames_per_bank() const { return dram_bank_bytes() / cfg_.page_size_bytes; }
  std::uint32_t gpu_dram_banks() const { return cfg_.num_gpus * cfg_.dram_banks_per_gpu; }
  std::uint32_t total_dram_banks() const {
    return gpu_dram_banks() + (cfg_.mode == Mode::TSM ? 0 : cfg_.host_dram_banks);
  }
  SimTime cu_cycle() const { return SimTime(std::llround(1000.0 / cfg_.cu_clock_ghz)); }

 private:
  friend ValidatedConfig validate(const SystemConfig&);
  explicit ValidatedConfig(const SystemConfig& c) : cfg_(c) {}
  SystemConfig cfg_;
};

namespace detail {

inline void require(bool ok, std::string_view field, std::string_view msg) {
  if (!ok) fail(ErrorCategory::Config, std::string(field) + ": " + std::string(msg));
}

inline void require_cache(std::string_view field, std::uint64_t capacity, std::uint32_t assoc,
                          std::uint32_t line) {
  require(capacity % (std::uint64_t{assoc} * line) == 0, field,
          "capacity must be a multiple of associativity x line size");
  require(is_power_of_two(capacity / (std::uint64_t{assoc} * line)), field,
          "number of sets must be a power of two");
}

}  // namespace detail

inline ValidatedConfig validate(const SystemConfig& c) {
  using detail::require;
  for_each_field(c, [](std::string_view k, const auto& ref) {
    using T = std::decay_t<decltype(ref)>;
    if constexpr (std::is_same_v<T, std::uint32_t>) {
      require(ref >= 1, k, "must be at least 1");
    } else if constexpr (std::is_same_v<T, double>) {
      require(std::isfinite(ref) && ref >= 0.0, k, "must be a finite non-negative number");
    }
  });
  require(c.cu_clock_ghz > 0.0, "cu_clock_ghz", "clock must be positive");
  require(c.link_bw_gbps > 0.0, "link_bw_gbps", "bandwidth must be positive");
  require(c.offchip_bw_gbps > 0.0, "offchip_bw_gbps", "bandwidth must be positive");
  require(c.dram_bank_bw_gbps > 0.0, "dram_bank_bw_gbps", "bandwidth must be positive");
  require(is_power_of_two(c.page_size_bytes), "page_size_bytes", "page size must be a power of two");
  require(is_power_of_two(c.cacheline_bytes), "cacheline_bytes", "line size must be a power of two");
  require(c.cacheline_bytes <= c.page_size_bytes, "cacheline_bytes",
          "line size must not exceed the page size");
  require((std::uint64_t{c.dram_bank_mb} << 20) % c.page_size_bytes == 0, "page_size_bytes",
          "page size must divide the bank capacity");

  const std::uint32_t line = c.cacheline_bytes;
  detail::require_cache("l1_vector_kb", std::uint64_t{c.l1_vector_kb} * 1024, c.l1_vector_assoc, line);
  detail::require_cache("l1_scalar_kb", std::uint64_t{c.l1_scalar_kb} * 1024, c.l1_scalar_assoc, line);
  detail::require_cache("l1i_kb", std::uint64_t{c.l1i_kb} * 1024, c.l1i_assoc, line);
  detail::require_cache("l2_bank_kb", std::uint64_t{c.l2_bank_kb} * 1024, c.l2_assoc, line);
  detail::require_cache("cpu_cache_kb", std::uint64_t{c.cpu_cache_kb} * 1024, c.cpu_cache_assoc, line);
  require(is_power_of_two(c.l2_banks_per_gpu), "l2_banks_per_gpu", "bank count must be a power of two");
  require(is_power_of_two(c.l1_tlb_sets), "l1_tlb_sets", "number of sets must be a power of two");
  require(is_power_of_two(c.l2_tlb_sets), "l2_tlb_sets", "number of sets must be a power of two");
  return ValidatedConfig(c);
}

}  // namespace mgpusim

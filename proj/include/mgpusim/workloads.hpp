#pragma once

// Memory-request streams: the text trace format, and generators for tiled
// SGEMM under the four local/remote matrix distributions, the three DNN
// weight-update communication patterns, seeded synthetic mixes and a
// streaming bandwidth probe.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mgpusim/config.hpp"
#include "mgpusim/topology.hpp"

namespace mgpusim {

enum class Op : std::uint8_t { Read, Write, Copy, Barrier };

/// Issuer of a record: DeviceId{Gpu, gpu, cu} or DeviceId::cpu().
inline DeviceId gpu_cu(std::uint32_t gpu, std::uint32_t cu) { return {DeviceKind::Gpu, gpu, cu}; }

struct TraceRecord {
  DeviceId device;
  Op op = Op::Read;
  std::uint64_t vaddr = 0;  // destination for copies
  std::uint64_t size = 0;
  std::uint64_t src = 0;    // copies only
  std::optional<std::uint64_t> dep;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Pre-touch of [vaddr, vaddr+size) by `device` before time zero.
struct Placement {
  DeviceId device;
  std::uint64_t vaddr = 0;
  std::uint64_t size = 0;
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct Workload {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<Placement> placements;
  std::vector<TraceRecord> records;

  friend bool operator==(const Workload&, const Workload&) = default;
};

struct WorkloadLedger {
  std::uint64_t read_bytes = 0;
  std::uint64_t write_bytes = 0;
  std::uint64_t copy_bytes = 0;
  std::uint64_t records = 0;
  std::uint64_t barriers = 0;
  friend bool operator==(const WorkloadLedger&, const WorkloadLedger&) = default;
};

inline WorkloadLedger ledger_of(const Workload& w) {
  WorkloadLedger l;
  for (const auto& r : w.records) {
    ++l.records;
    switch (r.op) {
      case Op::Read: l.read_bytes += r.size; break;
      case Op::Write: l.write_bytes += r.size; break;
      case Op::Copy: l.copy_bytes += r.size; break;
      case Op::Barrier: ++l.barriers; break;
    }
  }
  return l;
}

/// Machine facts generators need to lay out data and spread work.
struct GeneratorContext {
  std::uint32_t num_gpus = 4;
  std::uint32_t cus_per_gpu = 32;
  std::uint64_t page_bytes = 4096;
  std::uint32_t line_bytes = 64;

  static GeneratorContext from(const ValidatedConfig& vc) {
    return {vc->num_gpus, vc->cus_per_gpu, vc->page_size_bytes, vc->cacheline_bytes};
  }
};

inline std::uint64_t align_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) / a * a; }

// ---------------------------------------------------------------- validation

/// Structural checks: sizes, dependency DAG, issuers within the machine.
inline void validate_workload(const Workload& w, const GeneratorContext* ctx = nullptr) {
  auto check_device = [&](const DeviceId& d, std::size_t i, const char* what) {
    if (ctx == nullptr || d.kind != DeviceKind::Gpu) return;
    if (d.gpu >= ctx->num_gpus || d.index >= ctx->cus_per_gpu) {
      fail(ErrorCategory::Config, std::string(what) + " " + std::to_string(i) + ": device G" +
                                      std::to_string(d.gpu) + ".C" + std::to_string(d.index) +
                                      " does not exist in this configuration");
    }
  };
  for (std::size_t i = 0; i < w.placements.size(); ++i) {
    if (w.placements[i].size == 0)
      fail(ErrorCategory::Parse, "placement " + std::to_string(i) + ": size must be at least 1");
    check_device(w.placements[i].device, i, "placement");
  }
  for (std::size_t i = 0; i < w.records.size(); ++i) {
    const auto& r = w.records[i];
    if (r.op != Op::Barrier && r.size == 0)
      fail(ErrorCategory::Parse, "record " + std::to_string(i) + ": size must be at least 1");
    if (r.dep && *r.dep >= i) {
      fail(ErrorCategory::Parse, "record " + std::to_string(i) + ": dependency " +
                                     std::to_string(*r.dep) + " does not precede it");
    }
    check_device(r.device, i, "record");
  }
}

// -------------------------------------------------------------- trace format

namespace detail {

inline std::string device_text(const DeviceId& d, bool with_cu) {
  if (d.kind == DeviceKind::Cpu) return "CPU";
  std::string s = "G" + std::to_string(d.gpu);
  if (with_cu) s += ".C" + std::to_string(d.index);
  return s;
}

inline std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

inline bool parse_u64(std::string_view s, std::uint64_t& out, int base = 10) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline bool parse_hex(std::string_view s, std::uint64_t& out) {
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) return false;
  return parse_u64(s.substr(2), out, 16);
}

inline bool parse_device(std::string_view s, DeviceId& out) {
  if (s == "CPU") {
    out = DeviceId::cpu();
    return true;
  }
  if (s.size() < 2 || s[0] != 'G') return false;
  const auto dot = s.find('.');
  std::uint64_t g = 0, cu = 0;
  if (!parse_u64(s.substr(1, dot == std::string_view::npos ? std::string_view::npos : dot - 1), g))
    return false;
  if (dot != std::string_view::npos) {
    const auto rest = s.substr(dot + 1);
    if (rest.size() < 2 || rest[0] != 'C' || !parse_u64(rest.substr(1), cu)) return false;
  }
  if (g > UINT32_MAX || cu > UINT32_MAX) return false;
  out = gpu_cu(static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(cu));
  return true;
}

}  // namespace detail

/// Serializes a workload in the line-oriented trace format (see docs).
inline std::string to_trace_text(const Workload& w) {
  const auto l = ledger_of(w);
  std::ostringstream os;
  os << "# mgpusim trace v1\n";
  os << "# workload " << (w.name.empty() ? "unnamed" : w.name) << " seed " << w.seed << "\n";
  os << "# ledger read_bytes=" << l.read_bytes << " write_bytes=" << l.write_bytes
     << " copy_bytes=" << l.copy_bytes << " records=" << l.records << "\n";
  for (const auto& p : w.placements)
    os << detail::device_text(p.device, false) << " P " << detail::hex(p.vaddr) << ' ' << p.size << '\n';
  for (const auto& r : w.records) {
    switch (r.op) {
      case Op::Read:
      case Op::Write:
        os << detail::device_text(r.device, true) << (r.op == Op::Read ? " R " : " W ")
           << detail::hex(r.vaddr) << ' ' << r.size;
        break;
      case Op::Copy:
        os << detail::device_text(r.device, false) << " C " << detail::hex(r.vaddr) << ' ' << r.size
           << ' ' << detail::hex(r.src);
        break;
      case Op::Barrier: os << detail::device_text(r.device, false) << " B"; break;
    }
    if (r.dep) os << ' ' << *r.dep;
    os << '\n';
  }
  return os.str();
}

inline Workload parse_trace_text(std::string_view text, std::string name = "trace") {
  Workload w;
  w.name = std::move(name);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.starts_with("# workload ")) {
      // Header written by to_trace_text: "# workload <name> seed <n>".
      std::istringstream hs{std::string(line.substr(11))};
      std::string nm, kw;
      std::uint64_t sd = 0;
      if (hs >> nm >> kw >> sd && kw == "seed") {
        w.name = nm;
        w.seed = sd;
      }
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::string_view> tok;
    for (std::size_t i = 0; i < line.size();) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      const auto b = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > b) tok.push_back(line.substr(b, i - b));
    }
    if (tok.empty()) continue;

    auto bad = [&](const std::string& why) -> void {
      fail(ErrorCategory::Parse, "line " + std::to_string(line_no) + ": " + why);
    };
    TraceRecord r;
    if (!detail::parse_device(tok[0], r.device)) bad("bad device '" + std::string(tok[0]) + "'");
    if (tok.size() < 2) bad("missing operation");
    const std::string_view op = tok[1];
    std::size_t next = 2;
    auto need_hex = [&](std::uint64_t& out, const char* what) {
      if (next >= tok.size() || !detail::parse_hex(tok[next], out))
        bad(std::string("expected hex ") + what);
      ++next;
    };
    auto need_dec = [&](std::uint64_t& out, const char* what) {
      if (next >= tok.size() || !detail::parse_u64(tok[next], out))
        bad(std::string("expected decimal ") + what);
      ++next;
    };
    auto optional_dep = [&] {
      if (next < tok.size()) {
        std::uint64_t d = 0;
        if (!detail::parse_u64(tok[next], d)) bad("bad dependency index '" + std::string(tok[next]) + "'");
        r.dep = d;
        ++next;
      }
    };

    if (op == "P") {
      Placement p{r.device, 0, 0};
      need_hex(p.vaddr, "address");
      need_dec(p.size, "size");
      if (p.size == 0) bad("size must be at least 1");
      if (next != tok.size()) bad("trailing fields");
      w.placements.push_back(p);
      continue;
    }
    if (op == "R" || op == "W") {
      r.op = op == "R" ? Op::Read : Op::Write;
      need_hex(r.vaddr, "address");
      need_dec(r.size, "size");
      optional_dep();
    } else if (op == "C") {
      r.op = Op::Copy;
      need_hex(r.vaddr, "destination address");
      need_dec(r.size, "size");
      need_hex(r.src, "source address");
      optional_dep();
    } else if (op == "B") {
      r.op = Op::Barrier;
    } else {
      bad("unknown operation '" + std::string(op) + "'");
    }
    if (next != tok.size()) bad("trailing fields");
    if (r.op != Op::Barrier && r.size == 0) bad("size must be at least 1");
    if (r.dep && *r.dep >= w.records.size()) {
      fail(ErrorCategory::Parse, "line " + std::to_string(line_no) + ": dependency " +
                                     std::to_string(*r.dep) + " does not refer to an earlier record");
    }
    w.records.push_back(r);
  }
  return w;
}

inline Workload load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::Io, path + ": cannot open trace file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_trace_text(ss.str(), path);
  } catch (const SimError& e) {
    fail(e.category(), path + ": " + e.what());
  }
}

inline void save_trace(const Workload& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCategory::Io, path + ": cannot open for writing");
  out << to_trace_text(w);
  if (!out) fail(ErrorCategory::Io, path + ": write failed");
}

// ---------------------------------------------------------------- SGEMM

enum class SgemmDistribution { L100R0, L67R33, L33R67, L0R100 };

inline std::string_view to_string(SgemmDistribution d) {
  switch (d) {
    case SgemmDistribution::L100R0: return "L100R0";
    case SgemmDistribution::L67R33: return "L67R33";
    case SgemmDistribution::L33R67: return "L33R67";
    case SgemmDistribution::L0R100: return "L0R100";
  }
  return "?";
}

inline SgemmDistribution parse_distribution(std::string_view s) {
  if (s == "L100R0" || s == "100L-0R") return SgemmDistribution::L100R0;
  if (s == "L67R33" || s == "67L-33R") return SgemmDistribution::L67R33;
  if (s == "L33R67" || s == "33L-67R") return SgemmDistribution::L33R67;
  if (s == "L0R100" || s == "0L-100R") return SgemmDistribution::L0R100;
  fail(ErrorCategory::Config, "unknown SGEMM distribution '" + std::string(s) + "'");
}

struct SgemmSpec {
  std::uint64_t n = 256;
  std::uint32_t element_bytes = 4;
  SgemmDistribution distribution = SgemmDistribution::L100R0;
  std::uint64_t tile = 16;
};

/// GPU whose memory holds matrix A, B and C (indices 0..2) for a distribution.
/// The computing GPU is always GPU0; the remote one is GPU1.
inline std::array<std::uint32_t, 3> sgemm_homes(SgemmDistribution d) {
  switch (d) {
    case SgemmDistribution::L100R0: return {0, 0, 0};
    case SgemmDistribution::L67R33: return {0, 0, 1};
    case SgemmDistribution::L33R67: return {0, 1, 1};
    case SgemmDistribution::L0R100: return {1, 1, 1};
  }
  return {0, 0, 0};
}

/// Base virtual addresses of A, B, C.
inline std::array<std::uint64_t, 3> sgemm_layout(const SgemmSpec& s, std::uint64_t page_bytes) {
  const std::uint64_t bytes = s.n * s.n * s.element_bytes;
  const std::uint64_t stride = align_up(bytes, page_bytes);
  return {0, stride, 2 * stride};
}

/// Closed-form traffic of the tiled pattern when tile divides n:
/// A and B reads 2 n^3 / tile elements, C read once and written once.
inline WorkloadLedger sgemm_closed_form(const SgemmSpec& s) {
  WorkloadLedger l;
  l.read_bytes = 2 * s.n * s.n * s.n / s.tile * s.element_bytes + s.n * s.n * s.element_bytes;
  l.write_bytes = s.n * s.n * s.element_bytes;
  return l;
}

/// Tiled SGEMM on GPU0. Each C tile goes to one CU (round-robin); the CU reads
/// the C tile, then for every k-block the A and B tiles row by row, then
/// writes the C tile back. Matrices are pre-placed per the distribution.
inline Workload gen_sgemm(const SgemmSpec& s, const GeneratorContext& ctx) {
  if (s.n == 0 || s.tile == 0 || s.tile > s.n || s.element_bytes == 0)
    fail(ErrorCategory::Config, "sgemm: require n >= tile >= 1 and element_bytes >= 1");
  if (ctx.num_gpus < 2 && s.distribution != SgemmDistribution::L100R0)
    fail(ErrorCategory::Config, "sgemm: remote distributions need at least two GPUs");
  Workload w;
  w.name = "sgemm-" + std::string(to_string(s.distribution)) + "-n" + std::to_string(s.n) + "-t" +
           std::to_string(s.tile);
  const auto base = sgemm_layout(s, ctx.page_bytes);
  const auto homes = sgemm_homes(s.distribution);
  const std::uint64_t mat_bytes = s.n * s.n * s.element_bytes;
  for (int m = 0; m < 3; ++m) w.placements.push_back({gpu_cu(homes[m], 0), base[m], mat_bytes});

  const std::uint64_t nb = (s.n + s.tile - 1) / s.tile;
  const std::uint64_t eb = s.element_bytes;
  auto extent = [&](std::uint64_t b) { return std::min(s.tile, s.n - b * s.tile); };
  auto emit_tile = [&](const DeviceId& cu, Op op, int m, std::uint64_t bi, std::uint64_t bj) {
    for (std::uint64_t r = 0; r < extent(bi); ++r) {
      const std::uint64_t row = bi * s.tile + r;
      const std::uint64_t col = bj * s.tile;
      w.records.push_back({cu, op, base[m] + (row * s.n + col) * eb, extent(bj) * eb, 0, std::nullopt});
    }
  };
  std::uint64_t tile_idx = 0;
  for (std::uint64_t bi = 0; bi < nb; ++bi) {
    for (std::uint64_t bj = 0; bj < nb; ++bj, ++tile_idx) {
      const DeviceId cu = gpu_cu(0, static_cast<std::uint32_t>(tile_idx % ctx.cus_per_gpu));
      emit_tile(cu, Op::Read, 2, bi, bj);
      for (std::uint64_t bk = 0; bk < nb; ++bk) {
        emit_tile(cu, Op::Read, 0, bi, bk);
        emit_tile(cu, Op::Read, 1, bk, bj);
      }
      emit_tile(cu, Op::Write, 2, bi, bj);
    }
  }
  return w;
}

// ----------------------------------------------------- DNN weight update

enum class DnnAlgorithm { Memcpy, P2PDirect, SharedMM };

inline std::string_view to_string(DnnAlgorithm a) {
  switch (a) {
    case DnnAlgorithm::Memcpy: return "memcpy";
    case DnnAlgorithm::P2PDirect: return "p2p";
    case DnnAlgorithm::SharedMM: return "shared";
  }
  return "?";
}

inline DnnAlgorithm parse_dnn_algorithm(std::string_view s) {
  if (s == "memcpy" || s == "Memcpy") return DnnAlgorithm::Memcpy;
  if (s == "p2p" || s == "P2PDirect" || s == "p2pdirect") return DnnAlgorithm::P2PDirect;
  if (s == "shared" || s == "SharedMM" || s == "sharedmm") return DnnAlgorithm::SharedMM;
  fail(ErrorCategory::Config, "unknown DNN weight-update algorithm '" + std::string(s) + "'");
}

struct DnnWuSpec {
  DnnAlgorithm algorithm = DnnAlgorithm::Memcpy;
  std::uint64_t weight_bytes = 1 << 20;
  std::uint32_t num_gpus = 2;
};

/// Explicit inter-device copy bytes each algorithm moves (N = num_gpus):
/// Memcpy (3N - 2) W, P2PDirect W, SharedMM 0.
inline std::uint64_t dnn_copy_bytes(const DnnWuSpec& s) {
  switch (s.algorithm) {
    case DnnAlgorithm::Memcpy: return (3ULL * s.num_gpus - 2) * s.weight_bytes;
    case DnnAlgorithm::P2PDirect: return s.weight_bytes;
    case DnnAlgorithm::SharedMM: return 0;
  }
  return 0;
}

/// Weight-update iteration as data movement. Forward and backward passes
/// collapse to each GPU writing its W-byte gradient; phases are separated by
/// barriers. GPU0 performs the update.
inline Workload gen_dnn_wu(const DnnWuSpec& s, const GeneratorContext& ctx) {
  if (s.weight_bytes == 0) fail(ErrorCategory::Config, "dnn: weight_bytes must be at least 1");
  if (s.num_gpus < 2 || s.num_gpus > ctx.num_gpus)
    fail(ErrorCategory::Config, "dnn: num_gpus must be between 2 and the configured GPU count");
  Workload w;
  w.name = "dnn-" + std::string(to_string(s.algorithm)) + "-w" + std::to_string(s.weight_bytes);
  const std::uint64_t W = s.weight_bytes;
  const std::uint64_t region = align_up(W, ctx.page_bytes);
  const std::uint32_t G = s.num_gpus;
  std::uint64_t next_region = 0;
  auto alloc = [&] {
    const auto v = next_region;
    next_region += region;
    return v;
  };

  const std::uint64_t weights = alloc();  // host copy of the weights
  w.placements.push_back({DeviceId::cpu(), weights, W});

  auto barrier = [&] { w.records.push_back({DeviceId::cpu(), Op::Barrier, 0, 0, 0, std::nullopt}); };
  auto copy = [&](std::uint32_t dst_gpu, std::uint64_t dst, std::uint64_t src) {
    w.records.push_back({gpu_cu(dst_gpu, 0), Op::Copy, dst, W, src, std::nullopt});
  };
  // Sweeps W bytes in page-sized chunks spread round-robin over the GPU's CUs.
  auto chunks = [&](auto&& per_chunk) {
    for (std::uint64_t off = 0, k = 0; off < W; off += ctx.page_bytes, ++k)
      per_chunk(off, std::min<std::uint64_t>(ctx.page_bytes, W - off),
                static_cast<std::uint32_t>(k % ctx.cus_per_gpu));
  };
  auto write_gradient = [&](std::uint32_t gpu, std::uint64_t grad) {
    chunks([&](std::uint64_t off, std::uint64_t len, std::uint32_t cu) {
      w.records.push_back({gpu_cu(gpu, cu), Op::Write, grad + off, len, 0, std::nullopt});
    });
  };
  auto weight_update = [&](const std::vector<std::uint64_t>& grads, std::uint64_t target) {
    chunks([&](std::uint64_t off, std::uint64_t len, std::uint32_t cu) {
      for (auto g : grads) w.records.push_back({gpu_cu(0, cu), Op::Read, g + off, len, 0, std::nullopt});
      w.records.push_back({gpu_cu(0, cu), Op::Write, target + off, len, 0, std::nullopt});
    });
  };

  std::vector<std::uint64_t> grads(G);
  switch (s.algorithm) {
    case DnnAlgorithm::Memcpy: {
      std::vector<std::uint64_t> wgpu(G);
      for (auto& r : wgpu) r = alloc();
      for (auto& g : grads) g = alloc();
      std::vector<std::uint64_t> grad_copies(G);
      for (std::uint32_t i = 1; i < G; ++i) grad_copies[i] = alloc();

      for (std::uint32_t i = 0; i < G; ++i) copy(i, wgpu[i], weights);
      barrier();
      for (std::uint32_t i = 0; i < G; ++i) write_gradient(i, grads[i]);
      barrier();
      for (std::uint32_t i = 1; i < G; ++i) copy(0, grad_copies[i], grads[i]);
      barrier();
      std::vector<std::uint64_t> inputs{grads[0]};
      for (std::uint32_t i = 1; i < G; ++i) inputs.push_back(grad_copies[i]);
      weight_update(inputs, wgpu[0]);
      barrier();
      for (std::uint32_t i = 1; i < G; ++i) copy(i, wgpu[i], wgpu[0]);
      break;
    }
    case DnnAlgorithm::P2PDirect: {
      const std::uint64_t wgpu = alloc();
      for (auto& g : grads) g = alloc();
      copy(0, wgpu, weights);
      barrier();
      for (std::uint32_t i = 0; i < G; ++i) write_gradient(i, grads[i]);
      barrier();
      weight_update(grads, wgpu);
      break;
    }
    case DnnAlgorithm::SharedMM: {
      for (auto& g : grads) g = alloc();
      for (std::uint32_t i = 0; i < G; ++i) write_gradient(i, grads[i]);
      barrier();
      weight_update(grads, weights);
      break;
    }
  }
  return w;
}

// ------------------------------------------------------------- synthetic

/// Deterministic draws from a 64-bit Mersenne Twister. The reductions are
/// spelled out so traces are identical across standard libraries.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : eng_() % n; }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

struct SyntheticSpec {
  double local_fraction = 0.5;
  std::uint64_t total_accesses = 100000;
  std::vector<std::uint64_t> sizes{64};  // drawn uniformly
  std::uint64_t seed = 1;
  std::uint32_t num_gpus = 4;            // issuing GPUs, each owning one region
  std::uint64_t region_pages = 256;
  double write_fraction = 0.0;
};

/// Random accesses from all CUs of `num_gpus` GPUs. Each GPU's region is
/// pre-placed in its memory; an access targets the issuer's own region with
/// probability local_fraction, otherwise a uniformly chosen other region.
inline Workload gen_synthetic(const SyntheticSpec& s, const GeneratorContext& ctx) {
  if (!(s.local_fraction >= 0.0 && s.local_fraction <= 1.0))
    fail(ErrorCategory::Config, "synthetic: local_fraction must lie in [0, 1]");
  if (s.num_gpus == 0 || s.num_gpus > ctx.num_gpus)
    fail(ErrorCategory::Config, "synthetic: num_gpus must be between 1 and the configured GPU count");
  if (s.sizes.empty() || s.region_pages == 0)
    fail(ErrorCategory::Config, "synthetic: need at least one access size and one page per region");
  const std::uint64_t region = s.region_pages * ctx.page_bytes;
  for (auto sz : s.sizes)
    if (sz == 0 || sz > region) fail(ErrorCategory::Config, "synthetic: access size out of range");

  Workload w;
  std::ostringstream name;
  name << "synthetic-l" << s.local_fraction << "-n" << s.total_accesses;
  w.name = name.str();
  w.seed = s.seed;
  for (std::uint32_t g = 0; g < s.num_gpus; ++g) w.placements.push_back({gpu_cu(g, 0), g * region, region});

  SplitRng rng(s.seed);
  w.records.reserve(s.total_accesses);
  for (std::uint64_t i = 0; i < s.total_accesses; ++i) {
    const auto g = static_cast<std::uint32_t>(rng.below(s.num_gpus));
    const auto cu = static_cast<std::uint32_t>(rng.below(ctx.cus_per_gpu));
    std::uint32_t target = g;
    if (s.num_gpus > 1 && !(rng.unit() < s.local_fraction)) {
      target = static_cast<std::uint32_t>(rng.below(s.num_gpus - 1));
      if (target >= g) ++target;
    }
    const std::uint64_t size = s.sizes[rng.below(s.sizes.size())];
    const std::uint64_t slots = (region - size) / ctx.line_bytes + 1;
    const std::uint64_t offset = rng.below(slots) * ctx.line_bytes;
    const Op op = rng.unit() < s.write_fraction ? Op::Write : Op::Read;
    w.records.push_back({gpu_cu(g, cu), op, target * region + offset, size, 0, std::nullopt});
  }
  return w;
}

// ------------------------------------------------------------- streaming

struct StreamSpec {
  std::uint32_t num_gpus = 4;
  std::uint64_t bytes_per_cu = 256 * 1024;
  std::uint64_t record_bytes = 4096;
};

/// Every CU of every GPU reads its own disjoint contiguous range once.
inline Workload gen_stream(const StreamSpec& s, const GeneratorContext& ctx) {
  if (s.num_gpus == 0 || s.num_gpus > ctx.num_gpus || s.bytes_per_cu == 0 || s.record_bytes == 0)
    fail(ErrorCategory::Config, "stream: invalid parameters");
  Workload w;
  w.name = "stream-" + std::to_string(s.num_gpus) + "gpu-" + std::to_string(s.bytes_per_cu);
  const std::uint64_t span = align_up(s.bytes_per_cu, ctx.page_bytes);
  for (std::uint64_t off = 0; off < s.bytes_per_cu; off += s.record_bytes) {
    for (std::uint32_t g = 0; g < s.num_gpus; ++g) {
      for (std::uint32_t cu = 0; cu < ctx.cus_per_gpu; ++cu) {
        const std::uint64_t base = (std::uint64_t{g} * ctx.cus_per_gpu + cu) * span;
        w.records.push_back({gpu_cu(g, cu), Op::Read, base + off,
                             std::min(s.record_bytes, s.bytes_per_cu - off), 0, std::nullopt});
      }
    }
  }
  return w;
}

}  // namespace mgpusim

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "mgpusim/paging.hpp"
#include "mgpusim/workload_spec.hpp"
#include "mgpusim/workloads.hpp"

using namespace mgpusim;

namespace {

const GeneratorContext kCtx{};  // 4 GPUs x 32 CUs, 4 KB pages, 64 B lines

// Places a workload's directives in a fresh RDMA page table, the way the
// engine does before time zero.
PageTable placed(const Workload& w) {
  SystemConfig c;
  c.mode = Mode::RDMA;
  PageTable pt(validate(c));
  for (const auto& p : w.placements)
    for (std::uint64_t v = p.vaddr / 4096; v * 4096 < p.vaddr + p.size; ++v)
      if (!pt.find(v)) pt.place_page(v, p.device, SimTime{});
  return pt;
}

// Fraction of read/write record bytes whose page is remote for the issuer.
double remote_fraction(const Workload& w) {
  PageTable pt = placed(w);
  std::uint64_t remote = 0, total = 0;
  for (const auto& r : w.records) {
    if (r.op != Op::Read && r.op != Op::Write) continue;
    const auto tr = pt.translate(r.vaddr, r.device, SimTime{});
    if (!tr.mapped) {
      pt.place_page(pt.vpn_of(r.vaddr), r.device, SimTime{});
      continue;
    }
    total += r.size;
    if (tr.remote) remote += r.size;
  }
  return total == 0 ? 0.0 : static_cast<double>(remote) / static_cast<double>(total);
}

}  // namespace

TEST(Sgemm, LocalDistributionHasNoRemoteRecords) {
  const Workload w = gen_sgemm({128, 4, SgemmDistribution::L100R0, 16}, kCtx);
  EXPECT_EQ(remote_fraction(w), 0.0);
}

TEST(Sgemm, FullyRemoteDistributionResolvesEveryRecordToGpu1) {
  const Workload w = gen_sgemm({128, 4, SgemmDistribution::L0R100, 16}, kCtx);
  PageTable pt = placed(w);
  for (const auto& r : w.records) {
    const auto tr = pt.translate(r.vaddr, r.device, SimTime{});
    ASSERT_TRUE(tr.mapped);
    ASSERT_TRUE(tr.remote);
    ASSERT_EQ(pt.bank_island(tr.location.bank), 1u);
    ASSERT_EQ(r.device.gpu, 0u);
  }
}

TEST(Sgemm, ClosedFormLedgerAtN256Tile16) {
  const SgemmSpec s{256, 4, SgemmDistribution::L67R33, 16};
  const Workload w = gen_sgemm(s, kCtx);
  const auto got = ledger_of(w);
  // A and B: 2 n^3 / tile elements; C: read once, written once.
  const std::uint64_t n = 256, t = 16, e = 4;
  EXPECT_EQ(got.read_bytes, 2 * n * n * n / t * e + n * n * e);
  EXPECT_EQ(got.write_bytes, n * n * e);
  EXPECT_EQ(got.read_bytes, sgemm_closed_form(s).read_bytes);
  EXPECT_EQ(got.write_bytes, sgemm_closed_form(s).write_bytes);
  EXPECT_EQ(got.copy_bytes, 0u);
}

TEST(Sgemm, FootprintSplitFollowsTheDistribution) {
  const SgemmDistribution ds[] = {SgemmDistribution::L100R0, SgemmDistribution::L67R33,
                                  SgemmDistribution::L33R67, SgemmDistribution::L0R100};
  for (int k = 0; k < 4; ++k) {
    const Workload w = gen_sgemm({96, 4, ds[k], 32}, kCtx);
    std::uint64_t on_gpu1 = 0, total = 0;
    for (const auto& p : w.placements) {
      total += p.size;
      if (p.device.gpu == 1) on_gpu1 += p.size;
    }
    EXPECT_EQ(on_gpu1 * 3, total * static_cast<std::uint64_t>(k)) << to_string(ds[k]);
  }
}

TEST(Sgemm, DistributionNamesAcceptBothSpellings) {
  EXPECT_EQ(parse_distribution("L67R33"), SgemmDistribution::L67R33);
  EXPECT_EQ(parse_distribution("33L-67R"), SgemmDistribution::L33R67);
  EXPECT_THROW(parse_distribution("L50R50"), SimError);
  EXPECT_THROW(gen_sgemm({8, 4, SgemmDistribution::L100R0, 16}, kCtx), SimError);
}

TEST(DnnWu, ExplicitCopyBytes) {
  const std::uint64_t W = 1 << 20;
  EXPECT_EQ(ledger_of(gen_dnn_wu({DnnAlgorithm::Memcpy, W, 2}, kCtx)).copy_bytes, 4 * W);
  EXPECT_EQ(ledger_of(gen_dnn_wu({DnnAlgorithm::P2PDirect, W, 2}, kCtx)).copy_bytes, W);
  for (std::uint64_t w : {std::uint64_t{1}, std::uint64_t{4096}, std::uint64_t{3} << 20})
    EXPECT_EQ(ledger_of(gen_dnn_wu({DnnAlgorithm::SharedMM, w, 2}, kCtx)).copy_bytes, 0u);
  for (auto a : {DnnAlgorithm::Memcpy, DnnAlgorithm::P2PDirect, DnnAlgorithm::SharedMM})
    EXPECT_EQ(ledger_of(gen_dnn_wu({a, W, 2}, kCtx)).copy_bytes, dnn_copy_bytes({a, W, 2}));
}

TEST(DnnWu, P2PDirectWeightUpdateReadsTheRemoteGradient) {
  const std::uint64_t W = 1 << 20;
  const Workload w = gen_dnn_wu({DnnAlgorithm::P2PDirect, W, 2}, kCtx);
  // Replay: gradients are first-touched by their writers.
  PageTable pt = placed(w);
  std::uint64_t remote_reads = 0;
  for (const auto& r : w.records) {
    if (r.op != Op::Read && r.op != Op::Write) continue;
    const auto tr = pt.translate(r.vaddr, r.device, SimTime{});
    if (!tr.mapped) {
      pt.place_page(pt.vpn_of(r.vaddr), r.device, SimTime{});
      continue;
    }
    if (r.op == Op::Read && tr.remote) remote_reads += r.size;
  }
  EXPECT_EQ(remote_reads, W);
}

TEST(Synthetic, FullyLocalHasNoRemoteAccesses) {
  SyntheticSpec s;
  s.local_fraction = 1.0;
  s.total_accesses = 20000;
  EXPECT_EQ(remote_fraction(gen_synthetic(s, kCtx)), 0.0);
}

TEST(Synthetic, RemoteFractionWithinOnePercent) {
  SyntheticSpec s;
  s.local_fraction = 0.5;
  s.total_accesses = 100000;
  const double f = remote_fraction(gen_synthetic(s, kCtx));
  EXPECT_NEAR(f, 0.5, 0.01);
}

TEST(Synthetic, SeedDeterminesTheTrace) {
  SyntheticSpec s;
  s.total_accesses = 5000;
  s.sizes = {64, 128};
  s.write_fraction = 0.3;
  const auto a = to_trace_text(gen_synthetic(s, kCtx));
  EXPECT_EQ(a, to_trace_text(gen_synthetic(s, kCtx)));
  s.seed = 2;
  EXPECT_NE(a, to_trace_text(gen_synthetic(s, kCtx)));
}

TEST(Trace, EmptyTextIsAnEmptyWorkload) {
  const Workload w = parse_trace_text("");
  EXPECT_TRUE(w.records.empty());
  EXPECT_TRUE(w.placements.empty());
  EXPECT_TRUE(parse_trace_text("# only a comment\n\n   \n").records.empty());
}

TEST(Trace, SingleReadLine) {
  const Workload w = parse_trace_text("G0.C3 R 0x1000 64\n");
  ASSERT_EQ(w.records.size(), 1u);
  const auto& r = w.records[0];
  EXPECT_EQ(r.op, Op::Read);
  EXPECT_EQ(r.device, gpu_cu(0, 3));
  EXPECT_EQ(r.vaddr, 0x1000u);
  EXPECT_EQ(r.size, 64u);
  EXPECT_FALSE(r.dep.has_value());
}

TEST(Trace, FullGrammar) {
  const Workload w = parse_trace_text(
      "G1 P 0x0 8192\n"
      "CPU W 0x40 128   # trailing comment\n"
      "G1.C31 R 0x2000 4 0\n"
      "G0 C 0x10000 4096 0x0 1\n"
      "CPU B\n");
  ASSERT_EQ(w.placements.size(), 1u);
  EXPECT_EQ(w.placements[0].device.gpu, 1u);
  ASSERT_EQ(w.records.size(), 4u);
  EXPECT_EQ(w.records[0].device, DeviceId::cpu());
  EXPECT_EQ(*w.records[1].dep, 0u);
  EXPECT_EQ(w.records[2].op, Op::Copy);
  EXPECT_EQ(w.records[2].src, 0u);
  EXPECT_EQ(w.records[3].op, Op::Barrier);
}

TEST(Trace, ErrorsCarryLineNumbers) {
  auto message = [](std::string_view text) {
    try {
      parse_trace_text(text);
    } catch (const SimError& e) {
      EXPECT_EQ(e.category(), ErrorCategory::Parse);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("G0.C0 R 0x0 64\nG0.C0 X 0x0 64\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("\n\nG0.C0 R 1000 64\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("G0.C0 R 0x0 0\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("G0.C0 R 0x0 64 0\n").find("dependency"), std::string::npos);
  EXPECT_NE(message("Q R 0x0 64\n").find("bad device"), std::string::npos);
}

TEST(Trace, RoundTripOfGeneratedWorkloads) {
  for (const Workload& w : {gen_dnn_wu({DnnAlgorithm::Memcpy, 10000, 2}, kCtx),
                            gen_dnn_wu({DnnAlgorithm::P2PDirect, 1 << 16, 3}, kCtx),
                            gen_sgemm({64, 4, SgemmDistribution::L33R67, 16}, kCtx)}) {
    const Workload back = parse_trace_text(to_trace_text(w));
    EXPECT_EQ(back.records, w.records);
    EXPECT_EQ(back.placements, w.placements);
    EXPECT_EQ(back, w);
  }
}

TEST(Trace, FileRoundTripAndMissingFile) {
  const auto path = std::filesystem::temp_directory_path() / "mgpusim_trace_roundtrip.trace";
  const Workload w = gen_dnn_wu({DnnAlgorithm::SharedMM, 8192, 2}, kCtx);
  save_trace(w, path.string());
  EXPECT_EQ(load_trace(path.string()), w);
  std::filesystem::remove(path);
  try {
    load_trace("/nonexistent/dir/x.trace");
    FAIL();
  } catch (const SimError& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Io);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/x.trace"), std::string::npos);
  }
}

TEST(Validation, RejectsDevicesOutsideTheMachine) {
  Workload w;
  w.records.push_back({gpu_cu(7, 0), Op::Read, 0, 64, 0, std::nullopt});
  EXPECT_NO_THROW(validate_workload(w));
  EXPECT_THROW(validate_workload(w, &kCtx), SimError);
}

TEST(WorkloadSpec, SelectorsBuildGenerators) {
  EXPECT_EQ(make_workload("sgemm:n=64,tile=16,dist=L0R100", kCtx),
            gen_sgemm({64, 4, SgemmDistribution::L0R100, 16}, kCtx));
  EXPECT_EQ(make_workload("dnn:alg=p2p,w=64K", kCtx), gen_dnn_wu({DnnAlgorithm::P2PDirect, 65536, 2}, kCtx));
  SyntheticSpec s;
  s.local_fraction = 0.25;
  s.total_accesses = 300;
  s.sizes = {64, 128};
  s.seed = 9;
  EXPECT_EQ(make_workload("synthetic:local=0.25,accesses=300,sizes=64|128", kCtx, 9), gen_synthetic(s, kCtx));
  EXPECT_THROW(make_workload("sgemm:n=64,bogus=1", kCtx), SimError);
  EXPECT_THROW(make_workload("dnn:w=abc", kCtx), SimError);
  EXPECT_THROW(make_workload("/no/such/trace/file", kCtx), SimError);
}

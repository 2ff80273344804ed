#pragma once

// Reports, mode comparisons and their serialized forms.
//
// JSON documents use a fixed key order (nlohmann::ordered_json) and carry a
// schema tag; CSV and plot data are plain text with a header line. All three
// are byte-stable for identical inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgpusim/engine.hpp"

namespace mgpusim {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "mgpusim.report/1";
inline constexpr const char* kComparisonSchema = "mgpusim.comparison/1";

// ------------------------------------------------------------ report

inline ordered_json counters_to_json(const Counters& c) {
  ordered_json j = ordered_json::object();
  for_each_counter(c, [&](const char* k, const std::uint64_t& v) { j[k] = v; });
  return j;
}

inline Counters counters_from_json(const ordered_json& j) {
  Counters c;
  for_each_counter(c, [&](const char* k, std::uint64_t& v) { v = j.at(k).get<std::uint64_t>(); });
  return c;
}

inline ordered_json to_json(const StatsReport& r) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["mode"] = std::string(to_string(r.mode));
  j["workload"] = r.workload;
  j["fingerprint"] = r.fingerprint;
  j["sim_time_ps"] = r.sim_time_ps;
  j["counters"] = counters_to_json(r.counters);
  ordered_json links = ordered_json::array();
  for (const auto& l : r.links) {
    auto dir = [](const LinkDirStats& s) {
      ordered_json d;
      d["bytes"] = s.bytes;
      d["transfers"] = s.transfers;
      d["busy_ps"] = s.busy_ps;
      return d;
    };
    ordered_json lj;
    lj["name"] = l.name;
    lj["offchip"] = l.offchip;
    lj["bw_bytes_per_sec"] = l.bw_bytes_per_sec;
    lj["forward"] = dir(l.forward);
    lj["reverse"] = dir(l.reverse);
    links.push_back(std::move(lj));
  }
  j["links"] = std::move(links);
  return j;
}

inline StatsReport report_from_json(const ordered_json& j) {
  try {
    if (j.at("schema").get<std::string>() != kReportSchema)
      fail(ErrorCategory::Parse, "not a report document");
    StatsReport r;
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.workload = j.at("workload").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.sim_time_ps = j.at("sim_time_ps").get<std::int64_t>();
    r.counters = counters_from_json(j.at("counters"));
    for (const auto& lj : j.at("links")) {
      auto dir = [](const ordered_json& d) {
        return LinkDirStats{d.at("bytes").get<std::uint64_t>(), d.at("transfers").get<std::uint64_t>(),
                            d.at("busy_ps").get<std::int64_t>()};
      };
      r.links.push_back({lj.at("name").get<std::string>(), lj.at("offchip").get<bool>(),
                         lj.at("bw_bytes_per_sec").get<double>(), dir(lj.at("forward")),
                         dir(lj.at("reverse"))});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Parse, std::string("report JSON: ") + e.what());
  }
}

inline std::string report_csv(const StatsReport& r) {
  std::ostringstream os;
  os << "key,value\n";
  os << "mode," << to_string(r.mode) << "\n";
  os << "workload," << r.workload << "\n";
  os << "fingerprint," << r.fingerprint << "\n";
  os << "sim_time_ps," << r.sim_time_ps << "\n";
  for_each_counter(r.counters, [&](const char* k, const std::uint64_t& v) { os << k << ',' << v << '\n'; });
  return os.str();
}

inline std::string report_plotdata(const StatsReport& r) {
  std::ostringstream os;
  os << "# workload mode sim_time_ps\n";
  os << r.workload << ' ' << to_string(r.mode) << ' ' << r.sim_time_ps << '\n';
  return os.str();
}

// -------------------------------------------------------- comparison

struct ModeResult {
  Mode mode = Mode::TSM;
  std::int64_t sim_time_ps = 0;
  double speedup = 1.0;  // baseline time / this mode's time
  std::string fingerprint;
  Counters counters;
  friend bool operator==(const ModeResult&, const ModeResult&) = default;
};

struct WorkloadComparison {
  std::string workload;
  std::vector<ModeResult> results;  // in Comparison::modes order
  friend bool operator==(const WorkloadComparison&, const WorkloadComparison&) = default;
};

struct ModeMeans {
  Mode mode = Mode::TSM;
  double arithmetic = 1.0;
  double geometric = 1.0;
  friend bool operator==(const ModeMeans&, const ModeMeans&) = default;
};

struct Comparison {
  Mode baseline = Mode::RDMA;
  std::vector<Mode> modes;
  std::vector<WorkloadComparison> workloads;
  std::vector<ModeMeans> means;
  friend bool operator==(const Comparison&, const Comparison&) = default;

  const ModeResult& result(std::size_t workload, Mode m) const {
    for (const auto& r : workloads.at(workload).results)
      if (r.mode == m) return r;
    fail(ErrorCategory::Integrity, "mode not part of the comparison");
  }
};

inline double speedup_of(std::int64_t baseline_ps, std::int64_t mode_ps) {
  if (baseline_ps == mode_ps) return 1.0;
  if (mode_ps == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(baseline_ps) / static_cast<double>(mode_ps);
}

/// Fills speedups and means from per-mode simulated times.
inline void finalize(Comparison& c) {
  for (auto& w : c.workloads) {
    std::int64_t base = 0;
    for (const auto& r : w.results)
      if (r.mode == c.baseline) base = r.sim_time_ps;
    for (auto& r : w.results) r.speedup = r.mode == c.baseline ? 1.0 : speedup_of(base, r.sim_time_ps);
  }
  c.means.clear();
  for (Mode m : c.modes) {
    ModeMeans mm{m, 1.0, 1.0};
    if (!c.workloads.empty()) {
      double sum = 0.0, logsum = 0.0;
      for (std::size_t i = 0; i < c.workloads.size(); ++i) {
        const double s = c.result(i, m).speedup;
        sum += s;
        logsum += std::log(s);
      }
      const double n = static_cast<double>(c.workloads.size());
      mm.arithmetic = m == c.baseline ? 1.0 : sum / n;
      mm.geometric = m == c.baseline ? 1.0 : std::exp(logsum / n);
    }
    c.means.push_back(mm);
  }
}

/// Simulates every workload under every mode of `base` (mode field replaced)
/// and reports speedups relative to RDMA, or to the first mode when RDMA is
/// not among `modes`. Independent simulations may run on separate threads;
/// results are assembled in input order.
inline Comparison compare(const SystemConfig& base, const std::vector<Workload>& workloads,
                          const std::vector<Mode>& modes, bool parallel = false) {
  if (modes.size() < 2) fail(ErrorCategory::Config, "compare needs at least two modes");
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t k = i + 1; k < modes.size(); ++k)
      if (modes[i] == modes[k]) fail(ErrorCategory::Config, "compare: duplicate mode");
  Comparison c;
  c.modes = modes;
  c.baseline = std::find(modes.begin(), modes.end(), Mode::RDMA) != modes.end() ? Mode::RDMA : modes.front();

  std::vector<ValidatedConfig> cfgs;
  for (Mode m : modes) {
    SystemConfig sc = base;
    sc.mode = m;
    cfgs.push_back(validate(sc));
  }
  auto run_one = [&](std::size_t w, std::size_t m) {
    const StatsReport r = simulate(cfgs[m], workloads[w]);
    return ModeResult{modes[m], r.sim_time_ps, 1.0, r.fingerprint, r.counters};
  };

  c.workloads.resize(workloads.size());
  if (parallel) {
    std::vector<std::future<ModeResult>> fut;
    for (std::size_t w = 0; w < workloads.size(); ++w)
      for (std::size_t m = 0; m < modes.size(); ++m) fut.push_back(std::async(std::launch::async, run_one, w, m));
    std::size_t k = 0;
    for (std::size_t w = 0; w < workloads.size(); ++w) {
      c.workloads[w].workload = workloads[w].name;
      for (std::size_t m = 0; m < modes.size(); ++m) c.workloads[w].results.push_back(fut[k++].get());
    }
  } else {
    for (std::size_t w = 0; w < workloads.size(); ++w) {
      c.workloads[w].workload = workloads[w].name;
      for (std::size_t m = 0; m < modes.size(); ++m) c.workloads[w].results.push_back(run_one(w, m));
    }
  }
  finalize(c);
  return c;
}

inline ordered_json to_json(const Comparison& c) {
  ordered_json j;
  j["schema"] = kComparisonSchema;
  j["baseline"] = std::string(to_string(c.baseline));
  ordered_json modes = ordered_json::array();
  for (Mode m : c.modes) modes.push_back(std::string(to_string(m)));
  j["modes"] = modes;
  ordered_json ws = ordered_json::array();
  for (const auto& w : c.workloads) {
    ordered_json wj;
    wj["workload"] = w.workload;
    ordered_json rs = ordered_json::array();
    for (const auto& r : w.results) {
      ordered_json rj;
      rj["mode"] = std::string(to_string(r.mode));
      rj["sim_time_ps"] = r.sim_time_ps;
      rj["speedup"] = r.speedup;
      rj["fingerprint"] = r.fingerprint;
      rj["counters"] = counters_to_json(r.counters);
      rs.push_back(std::move(rj));
    }
    wj["results"] = std::move(rs);
    ws.push_back(std::move(wj));
  }
  j["workloads"] = std::move(ws);
  ordered_json means = ordered_json::array();
  for (const auto& m : c.means) {
    ordered_json mj;
    mj["mode"] = std::string(to_string(m.mode));
    mj["arithmetic_mean_speedup"] = m.arithmetic;
    mj["geometric_mean_speedup"] = m.geometric;
    means.push_back(std::move(mj));
  }
  j["means"] = std::move(means);
  return j;
}

inline Comparison comparison_from_json(const ordered_json& j) {
  try {
    if (j.at("schema").get<std::string>() != kComparisonSchema)
      fail(ErrorCategory::Parse, "not a comparison document");
    Comparison c;
    c.baseline = parse_mode(j.at("baseline").get<std::string>());
    for (const auto& m : j.at("modes")) c.modes.push_back(parse_mode(m.get<std::string>()));
    for (const auto& wj : j.at("workloads")) {
      WorkloadComparison w;
      w.workload = wj.at("workload").get<std::string>();
      for (const auto& rj : wj.at("results")) {
        w.results.push_back({parse_mode(rj.at("mode").get<std::string>()), rj.at("sim_time_ps").get<std::int64_t>(),
                             rj.at("speedup").get<double>(), rj.at("fingerprint").get<std::string>(),
                             counters_from_json(rj.at("counters"))});
      }
      c.workloads.push_back(std::move(w));
    }
    for (const auto& mj : j.at("means")) {
      c.means.push_back({parse_mode(mj.at("mode").get<std::string>()), mj.at("arithmetic_mean_speedup").get<double>(),
                         mj.at("geometric_mean_speedup").get<double>()});
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Parse, std::string("comparison JSON: ") + e.what());
  }
}

inline std::string comparison_csv(const Comparison& c) {
  std::ostringstream os;
  os.precision(17);
  os << "workload,mode,sim_time_ps,speedup\n";
  for (const auto& w : c.workloads)
    for (const auto& r : w.results)
      os << w.workload << ',' << to_string(r.mode) << ',' << r.sim_time_ps << ',' << r.speedup << '\n';
  return os.str();
}

/// Grouped-bar data: one row per (workload, mode), speedup w.r.t. the baseline.
inline std::string comparison_plotdata(const Comparison& c) {
  std::ostringstream os;
  os.precision(6);
  os << "# workload mode speedup (baseline " << to_string(c.baseline) << ")\n";
  for (const auto& w : c.workloads)
    for (const auto& r : w.results) os << w.workload << ' ' << to_string(r.mode) << ' ' << r.speedup << '\n';
  return os.str();
}

// -------------------------------------------------------------- emit

enum class Format { Json, Csv, PlotData };

inline Format parse_format(std::string_view s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "plotdata" || s == "plot") return Format::PlotData;
  fail(ErrorCategory::Config, "unknown output format '" + std::string(s) + "'");
}

inline std::string render(const StatsReport& r, Format f) {
  switch (f) {
    case Format::Json: return to_json(r).dump(2) + "\n";
    case Format::Csv: return report_csv(r);
    case Format::PlotData: return report_plotdata(r);
  }
  return {};
}

inline std::string render(const Comparison& c, Format f) {
  switch (f) {
    case Format::Json: return to_json(c).dump(2) + "\n";
    case Format::Csv: return comparison_csv(c);
    case Format::PlotData: return comparison_plotdata(c);
  }
  return {};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCategory::Io, path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorCategory::Io, path.string() + ": write failed");
}

template <typename T>
void emit(const T& doc, Format f, const std::filesystem::path& path) {
  write_file(path, render(doc, f));
}

}  // namespace mgpusim

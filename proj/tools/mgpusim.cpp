// Command-line front end: simulate, compare, sweep and trace.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgpusim/mgpusim.hpp"

using namespace mgpusim;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "Override one config key, key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Seed for generated workloads")->envname("MGPU_MEMSIM_SEED");
  cmd->add_option("--out", c.out_dir, "Output directory (default: print to stdout)");
  cmd->add_option("--format", c.format, "json, csv or plotdata (stdout only; --out writes all three)")
      ->check(CLI::IsMember({"json", "csv", "plotdata", "plot"}));
}

SystemConfig base_config(const Common& c) {
  SystemConfig cfg = c.config_path.empty() ? SystemConfig{} : load_config(c.config_path);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCategory::Config, "--set expects key=value, got '" + kv + "'");
    set_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::vector<Workload> load_workloads(const std::vector<std::string>& specs, const ValidatedConfig& vc,
                                     std::optional<std::uint64_t> seed) {
  std::vector<Workload> ws;
  const auto ctx = GeneratorContext::from(vc);
  for (const auto& s : specs) ws.push_back(make_workload(s, ctx, seed));
  return ws;
}

std::vector<Mode> parse_modes(const std::string& list) {
  std::vector<Mode> modes;
  std::stringstream ss(list);
  for (std::string m; std::getline(ss, m, ',');)
    if (!m.empty()) modes.push_back(parse_mode(m));
  return modes;
}

template <typename Doc>
void output(const Doc& doc, const Common& c, const std::string& stem) {
  if (c.out_dir.empty()) {
    std::cout << render(doc, parse_format(c.format));
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) fail(ErrorCategory::Io, c.out_dir + ": " + ec.message());
  const std::filesystem::path dir(c.out_dir);
  emit(doc, Format::Json, dir / (stem + ".json"));
  emit(doc, Format::Csv, dir / (stem + ".csv"));
  emit(doc, Format::PlotData, dir / (stem + ".plotdata"));
}

void print_summary(const Comparison& c) {
  std::fprintf(stderr, "%-32s", "workload");
  for (Mode m : c.modes) std::fprintf(stderr, " %14s", (std::string(to_string(m)) + "_us").c_str());
  std::fprintf(stderr, "\n");
  for (std::size_t i = 0; i < c.workloads.size(); ++i) {
    std::fprintf(stderr, "%-32s", c.workloads[i].workload.c_str());
    for (Mode m : c.modes) std::fprintf(stderr, " %14.3f", static_cast<double>(c.result(i, m).sim_time_ps) * 1e-6);
    std::fprintf(stderr, "\n");
  }
  for (const auto& m : c.means)
    std::fprintf(stderr, "speedup of %s over %s: arithmetic mean %.3f, geometric mean %.3f\n",
                 std::string(to_string(m.mode)).c_str(), std::string(to_string(c.baseline)).c_str(), m.arithmetic,
                 m.geometric);
}

// ------------------------------------------------------------------ sweep

struct SweepParam {
  std::string key;
  std::vector<std::string> values;
};

SweepParam parse_sweep_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    fail(ErrorCategory::Config, "--param expects key=v1,v2,... or key=start:stop:step, got '" + text + "'");
  SweepParam p{text.substr(0, eq), {}};
  const std::string range = text.substr(eq + 1);
  if (std::count(range.begin(), range.end(), ':') == 2) {
    double v[3];
    std::stringstream ss(range);
    std::string part;
    for (double& x : v) {
      std::getline(ss, part, ':');
      try {
        std::size_t used = 0;
        x = std::stod(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        fail(ErrorCategory::Config, "--param " + p.key + ": bad range '" + range + "'");
      }
    }
    if (!(v[2] > 0.0) || v[1] < v[0]) fail(ErrorCategory::Config, "--param " + p.key + ": empty range '" + range + "'");
    const auto steps = static_cast<long>((v[1] - v[0]) / v[2] + 1e-9);
    for (long i = 0; i <= steps; ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.15g", v[0] + static_cast<double>(i) * v[2]);
      p.values.push_back(buf);
    }
  } else {
    std::stringstream ss(range);
    for (std::string v; std::getline(ss, v, ',');)
      if (!v.empty()) p.values.push_back(v);
  }
  if (p.values.empty()) fail(ErrorCategory::Config, "--param " + p.key + ": no values");
  return p;
}

struct SweepPoint {
  std::vector<std::string> values;
  Comparison result;
};

ordered_json sweep_json(const std::vector<SweepParam>& params, const std::vector<SweepPoint>& points) {
  ordered_json j;
  j["schema"] = "mgpusim.sweep/1";
  ordered_json keys = ordered_json::array();
  for (const auto& p : params) keys.push_back(p.key);
  j["params"] = keys;
  ordered_json pts = ordered_json::array();
  for (const auto& pt : points) {
    ordered_json pj;
    ordered_json vals;
    for (std::size_t i = 0; i < params.size(); ++i) vals[params[i].key] = pt.values[i];
    pj["values"] = vals;
    pj["comparison"] = to_json(pt.result);
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  return j;
}

std::string sweep_csv(const std::vector<SweepParam>& params, const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& p : params) os << p.key << ',';
  os << "workload,mode,sim_time_ps,speedup\n";
  for (const auto& pt : points)
    for (const auto& w : pt.result.workloads)
      for (const auto& r : w.results) {
        for (const auto& v : pt.values) os << v << ',';
        os << w.workload << ',' << to_string(r.mode) << ',' << r.sim_time_ps << ',' << r.speedup << '\n';
      }
  return os.str();
}

std::string sweep_plotdata(const std::vector<SweepParam>& params, const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os.precision(6);
  os << "#";
  for (const auto& p : params) os << ' ' << p.key;
  os << " workload mode sim_time_ps speedup\n";
  for (const auto& pt : points)
    for (const auto& w : pt.result.workloads)
      for (const auto& r : w.results) {
        for (const auto& v : pt.values) os << v << ' ';
        os << w.workload << ' ' << to_string(r.mode) << ' ' << r.sim_time_ps << ' ' << r.speedup << '\n';
      }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-GPU memory organization simulator (TSM, RDMA, UM)"};
  app.require_subcommand(1);

  Common sim_opts, cmp_opts, sweep_opts;
  std::string sim_mode = "tsm", sim_workload;
  std::string cmp_modes = "tsm,rdma,um", sweep_modes = "tsm,rdma,um";
  std::vector<std::string> cmp_workloads, sweep_workloads, sweep_params;
  bool cmp_serial = false;
  std::string trace_workload, trace_out;
  std::optional<std::uint64_t> trace_seed;

  auto* sim = app.add_subcommand("simulate", "Run one workload under one memory organization");
  add_common(sim, sim_opts);
  sim->add_option("--mode", sim_mode, "tsm, rdma or um")->check(CLI::IsMember({"tsm", "rdma", "um", "TSM", "RDMA", "UM"}));
  sim->add_option("--workload", sim_workload, "Generator selector or trace file")->required();

  auto* cmp = app.add_subcommand("compare", "Run workloads under several organizations, speedups w.r.t. RDMA");
  add_common(cmp, cmp_opts);
  cmp->add_option("--modes", cmp_modes, "Comma-separated modes (at least two)");
  cmp->add_option("--workload", cmp_workloads, "Generator selector or trace file (repeatable)")->required();
  cmp->add_flag("--serial", cmp_serial, "Run the simulations one after another");

  auto* sweep = app.add_subcommand("sweep", "Repeat a comparison over config parameter values");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", sweep_params, "key=v1,v2,... or key=start:stop:step (repeatable, cartesian)")
      ->required();
  sweep->add_option("--modes", sweep_modes, "Comma-separated modes (at least two)");
  sweep->add_option("--workload", sweep_workloads, "Generator selector or trace file (repeatable)")->required();

  auto* trace = app.add_subcommand("trace", "Write a generated workload as a trace file");
  trace->add_option("--workload", trace_workload, "Generator selector")->required();
  trace->add_option("--out", trace_out, "Trace file to write")->required();
  trace->add_option("--seed", trace_seed, "Seed for generated workloads")->envname("MGPU_MEMSIM_SEED");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      SystemConfig cfg = base_config(sim_opts);
      cfg.mode = parse_mode(sim_mode);
      const auto vc = validate(cfg);
      const auto ws = load_workloads({sim_workload}, vc, sim_opts.seed);
      const StatsReport r = simulate(vc, ws.front());
      output(r, sim_opts, "report");
      std::fprintf(stderr, "%s %s: %.3f us\n", std::string(to_string(r.mode)).c_str(), r.workload.c_str(),
                   static_cast<double>(r.sim_time_ps) * 1e-6);
    } else if (*cmp) {
      const SystemConfig cfg = base_config(cmp_opts);
      const auto ws = load_workloads(cmp_workloads, validate(cfg), cmp_opts.seed);
      const Comparison c = compare(cfg, ws, parse_modes(cmp_modes), !cmp_serial);
      output(c, cmp_opts, "comparison");
      print_summary(c);
    } else if (*sweep) {
      const SystemConfig cfg = base_config(sweep_opts);
      std::vector<SweepParam> params;
      for (const auto& p : sweep_params) params.push_back(parse_sweep_param(p));
      const auto modes = parse_modes(sweep_modes);
      std::vector<SweepPoint> points;
      std::vector<std::size_t> idx(params.size(), 0);
      for (bool more = true; more;) {
        SweepPoint pt;
        SystemConfig pc = cfg;
        for (std::size_t i = 0; i < params.size(); ++i) {
          pt.values.push_back(params[i].values[idx[i]]);
          set_field(pc, params[i].key, params[i].values[idx[i]]);
        }
        const auto ws = load_workloads(sweep_workloads, validate(pc), sweep_opts.seed);
        pt.result = compare(pc, ws, modes, true);
        points.push_back(std::move(pt));
        more = false;
        for (std::size_t i = params.size(); i-- > 0;) {
          if (++idx[i] < params[i].values.size()) {
            more = true;
            break;
          }
          idx[i] = 0;
        }
      }
      const std::string json = sweep_json(params, points).dump(2) + "\n";
      const std::string csv = sweep_csv(params, points);
      const std::string plot = sweep_plotdata(params, points);
      if (sweep_opts.out_dir.empty()) {
        const Format f = parse_format(sweep_opts.format);
        std::cout << (f == Format::Json ? json : f == Format::Csv ? csv : plot);
      } else {
        std::error_code ec;
        std::filesystem::create_directories(sweep_opts.out_dir, ec);
        if (ec) fail(ErrorCategory::Io, sweep_opts.out_dir + ": " + ec.message());
        const std::filesystem::path dir(sweep_opts.out_dir);
        write_file(dir / "sweep.json", json);
        write_file(dir / "sweep.csv", csv);
        write_file(dir / "sweep.plotdata", plot);
      }
      std::fprintf(stderr, "%zu sweep points\n", points.size());
    } else if (*trace) {
      const auto vc = validate(SystemConfig{});
      save_trace(make_workload(trace_workload, GeneratorContext::from(vc), trace_seed), trace_out);
    }
  } catch (const SimError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.category())).c_str(), e.what());
    return exit_code(e.category());
  }
  return 0;
}

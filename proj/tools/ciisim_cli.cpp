// Command-line front end: run, sweep and topology export.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ciisim/metrics.hpp"

using namespace ciisim;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed,
            const std::string& out_path, const std::string& trace_path) {
  auto cfg = metrics::load_scenario(scenario);
  if (seed) cfg.seed = *seed;
  std::ofstream out = open_out(out_path);
  std::ofstream trace;
  protocol::Simulation::TraceSink sink;
  if (!trace_path.empty()) {
    trace = open_out(trace_path);
    sink = [&trace](const protocol::TraceEvent& e) { trace << protocol::format_trace(e) << '\n'; };
  }
  const MetricsRecord m = metrics::run_scenario(cfg, sink);
  metrics::Table t;
  t.header = metrics::sweep_header();
  t.rows.push_back(metrics::run_row("none", 0, cfg.seed, m));
  metrics::write_csv(t, out);
  if (!out.flush() || (trace.is_open() && !trace.flush()))
    throw std::runtime_error("write failed");
  std::cerr << "generated " << m.generated << " delivered " << m.delivered << " ratio "
            << m.delivery_ratio << " mean delay " << m.delay_mean_s << " s\n";
  return kOk;
}

int cmd_sweep(const std::string& scenario, const std::string& axis, const std::string& values,
              const std::string& seeds, const std::string& out_path) {
  const auto cfg = metrics::load_scenario(scenario);
  const auto ax = metrics::parse_axis(axis);
  std::vector<int> vals;
  for (auto v : metrics::parse_list(values)) vals.push_back(static_cast<int>(v));
  std::vector<std::uint64_t> seed_list;
  for (auto s : metrics::parse_list(seeds)) {
    if (s < 0) throw metrics::ConfigError("seeds must be non-negative");
    seed_list.push_back(static_cast<std::uint64_t>(s));
  }
  std::ofstream out = open_out(out_path);
  metrics::write_csv_row(metrics::sweep_header(), out);
  out.flush();
  metrics::sweep(cfg, ax, vals, seed_list, [&](const std::vector<std::string>& row) {
    metrics::write_csv_row(row, out);
    out.flush();
    if (row[0] == "run") std::cerr << axis << "=" << row[2] << " seed=" << row[3] << " done\n";
  });
  if (!out) throw std::runtime_error("write failed for " + out_path);
  return kOk;
}

int cmd_topology(const std::string& case_path, std::optional<double> distance, int relays,
                 int ehrns, std::uint64_t seed, std::optional<double> range_m,
                 const std::string& out_path) {
  const PowerCase pc = load_power_case(case_path);
  TopologyConfig tc;
  if (distance)
    tc.region.distance_threshold_km = *distance;
  else if (pc.region_distance_km)
    tc.region.distance_threshold_km = *pc.region_distance_km;
  else
    throw metrics::ConfigError("case has no region_distance; pass --region-distance");
  tc.counts.relays = relays;
  tc.counts.ehrns = ehrns;
  Rng rng(stream_seed(seed, metrics::kStreamTopology));
  const Topology topo = build_topology(pc, tc, rng);
  std::ofstream out = open_out(out_path);
  export_edge_list(topo, out, range_m);
  if (!out.flush()) throw std::runtime_error("write failed for " + out_path);
  std::cerr << pc.substations.size() << " substations, " << topo.regions.size()
            << " regions, main CC " << topo.main_cc << ", backup CC " << topo.backup_cc << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid wireless/optical grid-monitoring simulator"};
  app.require_subcommand(1);

  std::string scenario, out_path, trace_path, axis, values, seeds, case_path;
  std::optional<std::uint64_t> run_seed;
  std::optional<double> distance, range_m;
  int relays = 0, ehrns = 0;
  std::uint64_t topo_seed = 1;

  auto* run = app.add_subcommand("run", "run one scenario and write its metrics as CSV");
  run->add_option("--scenario", scenario, "scenario file")->required();
  run->add_option("--seed", run_seed, "override the scenario seed");
  run->add_option("--out", out_path, "metrics CSV")->required();
  run->add_option("--trace", trace_path, "packet trace output");

  auto* sw = app.add_subcommand("sweep", "sweep an attack count over values and seeds");
  sw->add_option("--scenario", scenario, "scenario file")->required();
  sw->add_option("--axis", axis, "compromised or malicious")->required();
  sw->add_option("--values", values, "e.g. 0,5,10,20")->required();
  sw->add_option("--seeds", seeds, "e.g. 1-10")->required();
  sw->add_option("--out", out_path, "CSV output")->required();

  auto* topo = app.add_subcommand("topology", "build the network and export its edge list");
  topo->add_option("--case", case_path, "power case file")->required();
  topo->add_option("--out", out_path, "edge list output")->required();
  topo->add_option("--region-distance", distance, "region threshold in km");
  topo->add_option("--relays", relays, "relay nodes to deploy")->check(CLI::NonNegativeNumber);
  topo->add_option("--ehrns", ehrns, "EHRNs to deploy")->check(CLI::NonNegativeNumber);
  topo->add_option("--seed", topo_seed, "deployment seed");
  topo->add_option("--range-m", range_m, "also export wireless edges for this range");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(scenario, run_seed, out_path, trace_path);
    if (*sw) return cmd_sweep(scenario, axis, values, seeds, out_path);
    return cmd_topology(case_path, distance, relays, ehrns, topo_seed, range_m, out_path);
  } catch (const metrics::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "case file error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

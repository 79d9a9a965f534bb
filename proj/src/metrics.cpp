#include "ciisim/metrics.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ciisim::metrics {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

template <class T>
T as(const pt::ptree& node, const std::string& where) {
  try {
    return node.get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("bad value '" + node.data() + "' for " + where);
  }
}

bool as_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean '" + v + "' for " + where);
}

std::set<NodeId> id_set(const std::string& v) {
  std::set<NodeId> out;
  for (auto id : parse_list(v)) out.insert(static_cast<NodeId>(id));
  return out;
}

// "12:0.3, 40:0.5"
std::map<NodeId, double> grayhole_map(const std::string& v, const std::string& where) {
  std::map<NodeId, double> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("expected id:probability in " + where);
    try {
      out[std::stoi(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw ConfigError("bad grayhole entry '" + item + "'");
    }
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> parse_list(const std::string& spec) {
  std::vector<std::int64_t> out;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
    try {
      const auto dash = item.find('-', 1);
      std::size_t used = 0;
      if (dash == std::string::npos) {
        out.push_back(std::stoll(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        const auto lo = std::stoll(item.substr(0, dash));
        const auto hi = std::stoll(item.substr(dash + 1), &used);
        if (used != item.size() - dash - 1 || hi < lo) throw std::invalid_argument(item);
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad list item '" + item + "'");
    }
  }
  return out;
}

ScenarioConfig parse_scenario(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("scenario line " + std::to_string(e.line()) + ": " + e.message());
  }
  ScenarioConfig c;
  auto& pc = c.protocol;
  auto& ac = c.attack;
  const std::map<std::string, std::map<std::string, std::function<void(const pt::ptree&, const std::string&)>>> keys = {
      {"topology",
       {{"case", [&](auto& v, auto&) { c.case_path = v.data(); }},
        {"region_distance_km", [&](auto& v, auto& w) { c.region_distance_km = as<double>(v, w); }},
        {"relays", [&](auto& v, auto& w) { c.counts.relays = as<int>(v, w); }},
        {"ehrns", [&](auto& v, auto& w) { c.counts.ehrns = as<int>(v, w); }},
        {"relay_battery_j", [&](auto& v, auto& w) { c.counts.relay_battery_j = as<double>(v, w); }},
        {"ehrn_battery_j", [&](auto& v, auto& w) { c.counts.ehrn_battery_j = as<double>(v, w); }}}},
      {"engine",
       {{"range_m", [&](auto& v, auto& w) { c.radio.range_m = as<double>(v, w); }},
        {"mac_latency_s", [&](auto& v, auto& w) { c.radio.mac_latency_s = as<double>(v, w); }},
        {"bitrate_bps", [&](auto& v, auto& w) { c.radio.bitrate_bps = as<double>(v, w); }},
        {"e_elec", [&](auto& v, auto& w) { c.energy.e_elec_j_per_bit = as<double>(v, w); }},
        {"e_amp", [&](auto& v, auto& w) { c.energy.e_amp_j_per_bit_m2 = as<double>(v, w); }},
        {"ehrn_capacity_j", [&](auto& v, auto& w) { c.energy.ehrn_capacity_j = as<double>(v, w); }},
        {"ehrn_recharge_w", [&](auto& v, auto& w) { c.energy.ehrn_recharge_w = as<double>(v, w); }},
        {"ehrn_wake_fraction", [&](auto& v, auto& w) { c.energy.ehrn_wake_fraction = as<double>(v, w); }}}},
      {"crypto", {{"curve", [&](auto& v, auto&) { c.curve = v.data(); }}}},
      {"protocol",
       {{"k_test", [&](auto& v, auto& w) { pc.k_test = as<int>(v, w); }},
        {"bootstrap_s", [&](auto& v, auto& w) { pc.bootstrap_s = as<double>(v, w); }},
        {"aggregation_window_s", [&](auto& v, auto& w) { pc.aggregation_window_s = as<double>(v, w); }},
        {"pmu_rate_hz", [&](auto& v, auto& w) { pc.pmu_rate_hz = as<double>(v, w); }},
        {"scada_mean_interval_s", [&](auto& v, auto& w) { pc.scada_mean_interval_s = as<double>(v, w); }},
        {"intra_substation_latency_s", [&](auto& v, auto& w) { pc.intra_substation_latency_s = as<double>(v, w); }},
        {"optical_latency_s", [&](auto& v, auto& w) { pc.optical_latency_s = as<double>(v, w); }},
        {"lan_latency_s", [&](auto& v, auto& w) { pc.lan_latency_s = as<double>(v, w); }},
        {"drain_s", [&](auto& v, auto& w) { pc.drain_s = as<double>(v, w); }},
        {"retransmit_on_reroute", [&](auto& v, auto& w) { pc.retransmit_on_reroute = as_bool(v.data(), w); }},
        {"max_hops", [&](auto& v, auto& w) { pc.max_hops = as<int>(v, w); }}}},
      {"attack",
       {{"compromised_count", [&](auto& v, auto& w) { ac.compromised_count = as<int>(v, w); }},
        {"malicious_count", [&](auto& v, auto& w) { ac.malicious_count = as<int>(v, w); }},
        {"activation_time", [&](auto& v, auto& w) { ac.activation_time = as<double>(v, w); }},
        {"blackhole_nodes", [&](auto& v, auto&) { ac.blackhole_nodes = id_set(v.data()); }},
        {"tamper_nodes", [&](auto& v, auto&) { ac.tamper_nodes = id_set(v.data()); }},
        {"grayhole", [&](auto& v, auto& w) { ac.grayhole = grayhole_map(v.data(), w); }}}},
      {"run",
       {{"duration_s", [&](auto& v, auto& w) { c.duration_s = as<double>(v, w); }},
        {"seed", [&](auto& v, auto& w) { c.seed = as<std::uint64_t>(v, w); }}}},
  };

  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside a section");
    const auto sec = keys.find(section);
    if (sec == keys.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      const auto k = sec->second.find(key);
      if (k == sec->second.end())
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      k->second(value, section + "." + key);
    }
  }
  if (c.case_path.empty()) throw ConfigError("[topology] case is required");
  if (fs::path(c.case_path).is_relative())
    c.case_path = (fs::path(base_dir) / c.case_path).lexically_normal().string();
  validate_scenario(c);
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path);
  return parse_scenario(in, fs::path(path).parent_path().string());
}

void validate_scenario(const ScenarioConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(fs::exists(c.case_path), "case file not found: " + c.case_path);
  require(c.duration_s > 0.0, "duration_s must be positive");
  require(c.counts.relays >= 0 && c.counts.ehrns >= 0, "node counts must be non-negative");
  require(c.counts.relay_battery_j >= 0.0 && c.counts.ehrn_battery_j >= 0.0,
          "batteries must be non-negative");
  require(!c.region_distance_km || *c.region_distance_km > 0.0,
          "region_distance_km must be positive");
  require(c.radio.range_m > 0.0, "range_m must be positive");
  require(c.radio.mac_latency_s >= 0.0 && c.radio.bitrate_bps > 0.0,
          "radio latency must be non-negative and bitrate positive");
  const auto& e = c.energy;
  require(e.e_elec_j_per_bit >= 0.0 && e.e_amp_j_per_bit_m2 >= 0.0 &&
              e.ehrn_capacity_j >= 0.0 && e.ehrn_recharge_w >= 0.0 &&
              e.ehrn_wake_fraction >= 0.0 && e.ehrn_wake_fraction <= 1.0,
          "energy constants must be non-negative");
  const auto& p = c.protocol;
  require(p.k_test >= 1, "k_test must be at least 1");
  require(p.bootstrap_s > 0.0, "bootstrap_s must be positive");
  require(p.aggregation_window_s > 0.0, "aggregation_window_s must be positive");
  require(p.pmu_rate_hz > 0.0, "pmu_rate_hz must be positive");
  require(p.scada_mean_interval_s >= 0.0, "scada_mean_interval_s must be non-negative");
  require(p.intra_substation_latency_s >= 0.0 && p.optical_latency_s >= 0.0 &&
              p.lan_latency_s >= 0.0 && p.drain_s >= 0.0,
          "latencies must be non-negative");
  require(p.max_hops >= 1, "max_hops must be at least 1");
  require(c.attack.compromised_count >= 0 && c.attack.malicious_count >= 0,
          "attack counts must be non-negative");
  require(c.attack.activation_time >= 0.0, "activation_time must be non-negative");
  for (auto [id, prob] : c.attack.grayhole)
    require(prob > 0.0 && prob < 1.0, "grayhole probability must lie in (0, 1)");
  curve_by_name(c.curve);
}

crypto::CurveParams curve_by_name(const std::string& name) {
  if (name == "secp256k1") return crypto::secp256k1();
  if (name == "toy") return crypto::toy_curve();
  throw ConfigError("unknown curve '" + name + "' (secp256k1 or toy)");
}

MetricsRecord run_scenario(const ScenarioConfig& cfg,
                           const protocol::Simulation::TraceSink& trace) {
  validate_scenario(cfg);
  const PowerCase pc = load_power_case(cfg.case_path);
  TopologyConfig tc;
  if (cfg.region_distance_km)
    tc.region.distance_threshold_km = *cfg.region_distance_km;
  else if (pc.region_distance_km)
    tc.region.distance_threshold_km = *pc.region_distance_km;
  else
    throw ConfigError("no region distance in the scenario or the case file");
  tc.counts = cfg.counts;

  Rng topo_rng(stream_seed(cfg.seed, kStreamTopology));
  Topology topo = build_topology(pc, tc, topo_rng);
  Rng attack_rng(stream_seed(cfg.seed, kStreamAttackSelection));
  attacks::AttackPlan plan;
  try {
    plan = attacks::apply_attack(topo, cfg.attack, attack_rng);
  } catch (const attacks::AttackConfigError& e) {
    throw ConfigError(e.what());
  }

  protocol::SimulationConfig sc;
  sc.radio = cfg.radio;
  sc.energy = cfg.energy;
  sc.protocol = cfg.protocol;
  sc.curve = curve_by_name(cfg.curve);
  sc.duration_s = cfg.duration_s;
  sc.seed = cfg.seed;
  protocol::Simulation sim(std::move(topo), sc, std::move(plan));
  if (trace) sim.set_trace(trace);
  sim.run();
  return sim.metrics();
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "compromised") return SweepAxis::kCompromised;
  if (s == "malicious") return SweepAxis::kMalicious;
  throw ConfigError("axis must be compromised or malicious, got '" + s + "'");
}

const char* axis_name(SweepAxis a) {
  return a == SweepAxis::kCompromised ? "compromised" : "malicious";
}

std::vector<std::string> metrics_columns() {
  return {"generated",          "delivered",         "delivery_ratio",
          "delay_mean_s",       "delay_p95_s",       "in_flight",
          "dropped",            "drops_blackhole",   "drops_dead_battery",
          "drops_no_route",     "drops_tampered",    "pmu_generated",
          "pmu_delivered",      "pmu_dropped",       "pmu_delay_mean_s",
          "tamper_rejections",  "reroutes",          "packets_dropped",
          "energy_consumed_j",  "dead_nodes"};
}

std::vector<double> metric_values(const MetricsRecord& m) {
  auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  return {d(m.generated),         d(m.delivered),         m.delivery_ratio,
          m.delay_mean_s,         m.delay_p95_s,          d(m.in_flight),
          d(m.dropped()),         d(m.drops_blackhole),   d(m.drops_dead_battery),
          d(m.drops_no_route),    d(m.drops_tampered),    d(m.pmu_generated),
          d(m.pmu_delivered),     d(m.pmu_dropped),       m.pmu_delay_mean_s,
          d(m.tamper_rejections), d(m.reroutes),          d(m.packets_dropped),
          m.energy_consumed_j,    d(m.dead_nodes)};
}

std::vector<std::string> sweep_header() {
  std::vector<std::string> h = {"row_type", "axis", "value", "seed"};
  for (auto& c : metrics_columns()) h.push_back(c);
  return h;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> run_row(const std::string& axis, int value, std::uint64_t seed,
                                 const MetricsRecord& m) {
  std::vector<std::string> row = {"run", axis, std::to_string(value), std::to_string(seed)};
  for (double v : metric_values(m)) row.push_back(format_number(v));
  return row;
}

Table sweep(const ScenarioConfig& base, SweepAxis axis, const std::vector<int>& values,
            const std::vector<std::uint64_t>& seeds,
            const std::function<void(const std::vector<std::string>&)>& on_row) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  for (int v : values)
    if (v < 0) throw ConfigError("sweep values must be non-negative");

  Table table;
  table.header = sweep_header();
  auto add = [&](std::vector<std::string> row) {
    if (on_row) on_row(row);
    table.rows.push_back(std::move(row));
  };
  std::vector<std::vector<double>> sums(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::uint64_t seed : seeds) {
      ScenarioConfig cfg = base;
      cfg.seed = seed;
      (axis == SweepAxis::kCompromised ? cfg.attack.compromised_count
                                       : cfg.attack.malicious_count) = values[i];
      const MetricsRecord m = run_scenario(cfg);
      const auto vals = metric_values(m);
      if (sums[i].empty()) sums[i].assign(vals.size(), 0.0);
      for (std::size_t k = 0; k < vals.size(); ++k) sums[i][k] += vals[k];
      add(run_row(axis_name(axis), values[i], seed, m));
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<std::string> row = {"mean", axis_name(axis), std::to_string(values[i]), ""};
    for (double s : sums[i]) row.push_back(format_number(s / static_cast<double>(seeds.size())));
    add(std::move(row));
  }
  return table;
}

void write_csv_row(const std::vector<std::string>& row, std::ostream& out) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    const std::string& cell = row[i];
    if (cell.find_first_of(",\"\n") == std::string::npos) {
      out << cell;
    } else {
      out << '"';
      for (char ch : cell) out << (ch == '"' ? "\"\"" : std::string(1, ch));
      out << '"';
    }
  }
  out << '\n';
}

void write_csv(const Table& table, std::ostream& out) {
  write_csv_row(table.header, out);
  for (const auto& r : table.rows) write_csv_row(r, out);
}

void export_csv(const Table& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(table, out);
  if (!out.flush()) throw std::runtime_error("write failed for " + path);
}

Table parse_csv(std::istream& in) {
  Table t;
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false, any = false, first = true;
  auto end_row = [&] {
    cells.push_back(std::move(cell));
    cell.clear();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
    cells.clear();
    any = false;
  };
  for (int c; (c = in.get()) != std::char_traits<char>::eof();) {
    const char ch = static_cast<char>(c);
    any = true;
    if (quoted) {
      if (ch != '"') {
        cell += ch;
      } else if (in.peek() == '"') {
        cell += '"';
        in.get();
      } else {
        quoted = false;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch == '\n') {
      end_row();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  if (any) end_row();
  return t;
}

Table load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return parse_csv(in);
}

}  // namespace ciisim::metrics

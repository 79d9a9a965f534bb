// Acceptance runner: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number, e.g. `acceptance 1 4`.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ciisim/crypto/ec.hpp"
#include "ciisim/crypto/mac.hpp"
#include "ciisim/crypto/rc5.hpp"
#include "ciisim/metrics.hpp"
#include "ciisim/protocol/channel.hpp"
#include "ciisim/protocol/trust.hpp"
#include "../unit/scripted.hpp"

using namespace ciisim;
using namespace ciisim::protocol;
using crypto::Bytes;

namespace {

// A criterion fills `notes` and returns whether it held.
struct Outcome {
  bool ok = true;
  std::string notes;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes += (notes.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { notes += (notes.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string scenario(const std::string& name) {
  return test::source_path("data/scenarios/" + name);
}

// ------------------------------------------------------------------ 1

void check_case(Outcome& o, const std::string& file, std::size_t subs, std::size_t regions,
                SubstationId main, std::vector<BusId> main_buses, SubstationId backup,
                std::vector<BusId> backup_buses) {
  const auto t0 = std::chrono::steady_clock::now();
  const PowerCase pc = load_power_case(test::source_path("data/cases/" + file));
  TopologyConfig cfg;
  cfg.region.distance_threshold_km = *pc.region_distance_km;
  cfg.counts = {0, 0, 0.0, 0.0};
  Rng rng(1);
  const Topology topo = build_topology(pc, cfg, rng);
  const double dt = seconds_since(t0);
  o.require(pc.substations.size() == subs, file + " substation count");
  o.require(topo.regions.size() == regions, file + " region count");
  o.require(topo.main_cc == main, file + " main CC");
  o.require(topo.backup_cc == backup, file + " backup CC");
  o.require(pc.substation(main).buses == main_buses, file + " main CC buses");
  o.require(pc.substation(backup).buses == backup_buses, file + " backup CC buses");
  o.require(dt < 1.0, file + " took " + fmt("%.3f s", dt));
  o.note(file + " " + std::to_string(subs) + " substations, " +
         std::to_string(topo.regions.size()) + " regions, " + fmt("%.3f s", dt));
}

Outcome c1() {
  Outcome o;
  const PowerCase c14 = load_power_case(test::source_path("data/cases/ieee14.case"));
  check_case(o, "ieee14.case", 11, 3, 1, c14.substation(1).buses, 2, c14.substation(2).buses);
  check_case(o, "ieee118.case", 107, 8, 61, {68, 69, 116}, 16, {17, 30});
  return o;
}

// ------------------------------------------------------------------ 2

// Brute-force addition over the 19-point curve y^2 = x^3 + 2x + 2 mod 17.
crypto::Point toy_add(const crypto::Point& a, const crypto::Point& b) {
  constexpr int p = 17;
  if (a.infinity) return b;
  if (b.infinity) return a;
  const int x1 = int(a.x), y1 = int(a.y), x2 = int(b.x), y2 = int(b.y);
  auto quotient = [](int num, int den) {
    num = ((num % p) + p) % p;
    den = ((den % p) + p) % p;
    for (int s = 0; s < p; ++s)
      if (s * den % p == num) return s;
    return -1;
  };
  int s;
  if (x1 == x2) {
    if ((y1 + y2) % p == 0) return crypto::Point::identity();
    s = quotient(3 * x1 * x1 + 2, 2 * y1);
  } else {
    s = quotient(y2 - y1, x2 - x1);
  }
  const int x3 = ((s * s - x1 - x2) % p + p) % p;
  const int y3 = ((s * (x1 - x3) - y1) % p + p) % p;
  return crypto::Point{x3, y3, false};
}

Outcome c2() {
  Outcome o;
  int rc5_bad = 0, rc5_n = 0;
  for (const auto& row : test::read_columns("tests/fixtures/rc5_kat.txt")) {
    const crypto::Rc5 cipher(crypto::from_hex(row[0]));
    const Bytes pt = crypto::from_hex(row[1]);
    const Bytes ct = crypto::from_hex(row[2]);
    ++rc5_n;
    if (crypto::to_hex(cipher.encrypt_block(std::span<const std::uint8_t, 8>(pt.data(), 8))) !=
        row[2])
      ++rc5_bad;
    if (crypto::to_hex(cipher.decrypt_block(std::span<const std::uint8_t, 8>(ct.data(), 8))) !=
        row[1])
      ++rc5_bad;
  }
  int mac_bad = 0, mac_n = 0;
  for (const auto& row : test::read_columns("tests/fixtures/hmac_sha256_kat.txt")) {
    ++mac_n;
    if (crypto::to_hex(crypto::hmac(crypto::from_hex(row[0]), crypto::from_hex(row[1]))) !=
        row[2])
      ++mac_bad;
  }
  const auto curve = crypto::toy_curve();
  std::vector<crypto::Point> pts{crypto::Point::identity()};
  for (int x = 0; x < 17; ++x)
    for (int y = 0; y < 17; ++y)
      if ((y * y - (x * x * x + 2 * x + 2)) % 17 == 0) pts.push_back(crypto::Point{x, y, false});
  int group_bad = 0;
  for (const auto& a : pts)
    for (const auto& b : pts)
      if (!(crypto::point_add(curve, a, b) == toy_add(a, b))) ++group_bad;
  o.require(rc5_n > 0 && rc5_bad == 0, std::to_string(rc5_bad) + " RC5 mismatches");
  o.require(mac_n > 0 && mac_bad == 0, std::to_string(mac_bad) + " HMAC mismatches");
  o.require(pts.size() == 19, "toy curve has " + std::to_string(pts.size()) + " points");
  o.require(group_bad == 0, std::to_string(group_bad) + " group-law mismatches");
  o.note(std::to_string(rc5_n) + " RC5 vectors, " + std::to_string(mac_n) +
         " HMAC vectors, " + std::to_string(pts.size() * pts.size()) + " point sums");
  return o;
}

// ------------------------------------------------------------------ 3

Outcome c3() {
  Outcome o;
  int bad = 0;
  if (trust_value(10, 10) != 100.0) ++bad;
  if (trust_value(100, 95) != 95.0) ++bad;
  for (std::uint64_t k = 1; k <= 100; ++k)
    if (trust_value(k, 0) != 0.0) ++bad;
  o.require(bad == 0, std::to_string(bad) + " trust mismatches");

  int mono = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k) {
        const double bp = i * 11.0, tv = j * 11.0;
        const double cv = candidate_value(bp, tv, k);
        if (i < 9 && candidate_value(bp + 11.0, tv, k) < cv) ++mono;
        if (j < 9 && candidate_value(bp, tv + 11.0, k) < cv) ++mono;
        if (k < 9 && candidate_value(bp, tv, k + 1) < cv) ++mono;
      }
  o.require(mono == 0, std::to_string(mono) + " monotonicity violations");

  Rng rng(33);
  std::uniform_int_distribution<int> size(1, 12), pct(0, 100), cn(0, 9);
  std::uniform_real_distribution<double> scale(0.001, 1000.0);
  int argmax = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredCandidate> c;
    const int n = size(rng);
    for (int i = 0; i < n; ++i)
      c.push_back({i + 1, candidate_value(pct(rng), pct(rng), cn(rng))});
    if (std::none_of(c.begin(), c.end(), [](auto& x) { return x.cv > 0; })) c[0].cv = 1.0;
    const NodeId head = elect_cluster_head(c);
    const double k = scale(rng);
    for (auto& x : c) x.cv *= k;
    if (elect_cluster_head(c) != head) ++argmax;
  }
  o.require(argmax == 0, std::to_string(argmax) + " argmax changes under scaling");
  o.note("1000-point grid, 100 scaled candidate sets");
  return o;
}

// ------------------------------------------------------------------ 4

Outcome c4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const crypto::GlobalKey gbk([] {
    Bytes b(32);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>(i * 7 + 1);
    return b;
  }());
  Rng rng(4);
  std::map<NodeId, SharedSecret> secrets;
  for (NodeId id = 1; id <= 16; ++id) {
    SharedSecret s;
    for (auto& b : s) b = static_cast<std::uint8_t>(rng());
    secrets[id] = s;
  }
  std::uniform_int_distribution<NodeId> who(1, 16);
  int false_accepts = 0, false_rejects = 0;
  for (int i = 0; i < 20000; ++i) {
    const NodeId src = who(rng);
    const Sensor sensor{1000 + src, Role::kMuSensor, src, true};
    const SensorReading r = *sense(sensor, 0.01 * i, static_cast<std::uint64_t>(i));
    Packet p;
    p.seq = static_cast<std::uint64_t>(i);
    p.src = src;
    p.kind = PacketKind::kScada;
    const auto sealed = seal_reading(secrets.at(src), gbk, p.seq, r);
    p.ciphertext = sealed.ciphertext;
    p.tag = sealed.tag;
    const bool corrupt = i % 2 == 1;
    if (corrupt) {
      const std::size_t bits = 8 * (p.ciphertext.size() + p.tag->size());
      const std::size_t bit = std::uniform_int_distribution<std::size_t>(0, bits - 1)(rng);
      const std::size_t byte = bit / 8;
      const auto mask = static_cast<std::uint8_t>(1u << (bit % 8));
      if (byte < p.ciphertext.size())
        p.ciphertext[byte] ^= mask;
      else
        (*p.tag)[byte - p.ciphertext.size()] ^= mask;
    }
    const auto v = verify_and_decrypt(secrets, gbk, p);
    const bool accepted = v.status == VerifyStatus::kAccepted && v.reading && *v.reading == r;
    if (corrupt && v.status == VerifyStatus::kAccepted) ++false_accepts;
    if (!corrupt && !accepted) ++false_rejects;
  }
  const double dt = seconds_since(t0);
  o.require(false_accepts == 0, std::to_string(false_accepts) + " corrupted packets accepted");
  o.require(false_rejects == 0, std::to_string(false_rejects) + " clean packets rejected");
  o.require(dt < 30.0, "took " + fmt("%.1f s", dt));
  o.note("10000 corrupted, 10000 clean, " + fmt("%.2f s", dt));
  return o;
}

// ------------------------------------------------------------------ 5

Outcome c5() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = metrics::load_scenario(scenario("ieee118_baseline.ini"));
  const PowerCase pc = load_power_case(cfg.case_path);
  TopologyConfig tc;
  tc.region.distance_threshold_km = cfg.region_distance_km.value_or(*pc.region_distance_km);
  tc.counts = cfg.counts;
  Rng topo_rng(stream_seed(cfg.seed, metrics::kStreamTopology));
  const Topology topo = build_topology(pc, tc, topo_rng);
  SimulationConfig sc;
  sc.radio = cfg.radio;
  sc.energy = cfg.energy;
  sc.protocol = cfg.protocol;
  sc.curve = metrics::curve_by_name(cfg.curve);
  sc.duration_s = cfg.duration_s;
  sc.seed = cfg.seed;
  Simulation sim(topo, sc);

  // Every hop send must be closed by exactly one receive or drop on the
  // same link.
  using HopKey = std::tuple<std::uint64_t, NodeId, NodeId, int>;
  std::map<HopKey, int> open;
  std::size_t events = 0, orphans = 0;
  sim.set_trace([&](const TraceEvent& e) {
    ++events;
    const HopKey key{e.pkt, e.src, e.dst, static_cast<int>(e.kind)};
    if (e.ev == TraceEv::kSend) {
      ++open[key];
    } else if (e.ev == TraceEv::kRecv || e.ev == TraceEv::kDrop) {
      auto it = open.find(key);
      if (it == open.end()) {
        if (e.ev == TraceEv::kRecv) ++orphans;  // drops may precede any send
        return;
      }
      if (--it->second == 0) open.erase(it);
    }
  });
  sim.run();
  const auto m = sim.metrics();
  const double dt = seconds_since(t0);

  o.require(m.generated > 0 && m.delivery_ratio == 1.0,
            "delivery ratio " + fmt("%.6f", m.delivery_ratio));
  o.require(m.delivered + m.in_flight + m.dropped() == m.generated, "reading accounting");
  o.require(m.dropped() == 0 && m.in_flight == 0, "readings dropped or stranded");
  o.require(open.empty(), std::to_string(open.size()) + " unclosed hops");
  o.require(orphans == 0, std::to_string(orphans) + " receives without a send");
  for (NodeId server : {topo.main_cc_server, topo.backup_cc_server}) {
    std::map<std::uint64_t, int> seen;
    for (const auto& entry : sim.server(server).log)
      for (auto id : entry.reading_ids) ++seen[id];
    const bool once = std::all_of(seen.begin(), seen.end(), [](auto& kv) { return kv.second == 1; });
    o.require(seen.size() == sim.readings().size() && once,
              "server " + std::to_string(server) + " aggregate closure");
  }
  o.require(dt < 120.0, "took " + fmt("%.1f s", dt));
  o.note(std::to_string(m.generated) + " readings, " + std::to_string(events) +
         " trace events, " + fmt("%.1f s", dt));
  return o;
}

// ------------------------------------------------------------------ 6

metrics::Table run_sweep(const std::string& file, metrics::SweepAxis axis,
                         const std::vector<int>& values, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto base = metrics::load_scenario(scenario(file));
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
  auto table = metrics::sweep(base, axis, values, seeds);
  seconds = seconds_since(t0);
  return table;
}

std::vector<double> means_of(const metrics::Table& table, const std::string& column) {
  const auto col = static_cast<std::size_t>(
      std::find(table.header.begin(), table.header.end(), column) - table.header.begin());
  std::vector<double> means;
  for (const auto& row : table.rows)
    if (row[0] == "mean") means.push_back(std::stod(row[col]));
  return means;
}

std::string series(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.6g", x);
  return s;
}

Outcome c6() {
  Outcome o;
  double t_drop = 0, t_delay = 0;
  const auto drops = means_of(
      run_sweep("ieee118_sweep.ini", metrics::SweepAxis::kCompromised, {0, 5, 10, 20}, t_drop),
      "dropped");
  o.require(drops.size() == 4 && drops[0] == 0.0, "drops at 0 compromised");
  o.require(std::is_sorted(drops.begin(), drops.end()), "drops decrease somewhere");
  o.require(t_drop < 600.0, "drop sweep took " + fmt("%.0f s", t_drop));
  const auto tamper =
      run_sweep("ieee118_tamper_sweep.ini", metrics::SweepAxis::kMalicious, {0, 5, 10}, t_delay);
  const auto delays = means_of(tamper, "delay_mean_s");
  const auto reroutes = means_of(tamper, "reroutes");
  o.require(delays.size() == 3 && std::is_sorted(delays.begin(), delays.end()),
            "delay decreases somewhere");
  o.require(t_delay < 600.0, "delay sweep took " + fmt("%.0f s", t_delay));
  o.note("mean drops [" + series(drops) + "] in " + fmt("%.0f s", t_drop) +
         ", mean delay [" + series(delays) + "] with mean reroutes [" + series(reroutes) + "] in " +
         fmt("%.0f s", t_delay));
  return o;
}

// ------------------------------------------------------------------ 7

Outcome c7() {
  Outcome o;
  // A and B both reach gateway 1 and the RS; A wins the initial election
  // on the lower id and tampers.
  const Topology topo = test::scripted_topology({{Role::kRelayNode, {0.25, 0.05}, 50.0},
                                                 {Role::kRelayNode, {0.25, -0.05}, 50.0},
                                                 {Role::kRelayNode, {0.75, 0.0}, 50.0},
                                                 {Role::kEhrn, {0.25, 0.1}, 50.0}});
  const auto n = static_cast<NodeId>(topo.nodes.size());
  const NodeId a = n - 4, b = n - 3;
  const NodeId gw = topo.gateway_of.at(1);
  NodeId mu = kNoNode;
  for (const auto& node : topo.nodes)
    if (node.role == Role::kMuSensor && node.substation == 1) mu = node.id;

  attacks::AttackConfig ac;
  ac.tamper_nodes = {a};
  Rng rng(1);
  Simulation sim(topo, test::quiet_config(6.0), attacks::apply_attack(topo, ac, rng));
  std::vector<TraceEvent> trace;
  sim.set_trace([&](const TraceEvent& e) { trace.push_back(e); });
  sim.run_until(2.0);
  const double tv_before = sim.gateway(gw).relay_trust.at(a).trust_value();
  const NodeId head_before = sim.gateway(gw).head;
  for (double t : {2.5, 3.0, 3.5}) sim.inject_scada(mu, t);
  sim.run();
  const double tv_after = sim.gateway(gw).relay_trust.at(a).trust_value();

  std::uint64_t rejected = 0;
  const TraceEvent* reroute = nullptr;
  std::size_t reroutes = 0;
  for (const auto& e : trace) {
    if (e.ev == TraceEv::kReject) rejected = e.pkt;
    if (e.ev == TraceEv::kReroute) {
      ++reroutes;
      if (!reroute) reroute = &e;
    }
  }
  // After the reroute, B carries a SCADA packet that the RS accepts.
  bool delivered_via_b = false;
  if (reroute)
    for (const auto& e : trace)
      if (e.t > reroute->t && e.ev == TraceEv::kRecv && e.kind == PacketKind::kScada &&
          e.src == b)
        delivered_via_b = true;
  const auto m = sim.metrics();
  o.require(head_before == a, "tampering relay was not the first head");
  o.require(reroutes >= 1, "no reroute logged");
  o.require(reroute && reroute->pkt == rejected && reroute->dst == gw,
            "reroute does not name the rejected packet at the gateway");
  o.require(delivered_via_b, "no delivery through the alternative after the reroute");
  o.require(sim.gateway(gw).head == b, "gateway did not switch to the alternative");
  o.require(m.delivered == 3 && m.generated == 3, "not every reading delivered");
  o.require(tv_after < tv_before, "trust did not fall");
  o.note(std::to_string(reroutes) + " reroute, trust " + fmt("%.4g", tv_before) + " -> " +
         fmt("%.4g", tv_after));
  return o;
}

// ------------------------------------------------------------------ 8

Outcome c8() {
  Outcome o;
  const auto cfg = metrics::load_scenario(scenario("ieee118_attack.ini"));
  std::string traces[2];
  MetricsRecord records[2];
  for (int i = 0; i < 2; ++i) {
    std::string& out = traces[i];
    records[i] = metrics::run_scenario(cfg, [&](const TraceEvent& e) {
      out += format_trace(e);
      out += '\n';
    });
  }
  o.require(!traces[0].empty() && traces[0] == traces[1], "traces differ");
  o.require(records[0] == records[1], "metrics differ");
  o.require(records[0].dropped() > 0 || records[0].tamper_rejections > 0,
            "attack scenario shows no attack effect");
  const auto digest = crypto::sha256(Bytes(traces[0].begin(), traces[0].end()));
  o.note(std::to_string(traces[0].size()) + " trace bytes, sha256 " +
         crypto::to_hex(Bytes(digest.begin(), digest.end())).substr(0, 16));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"topology facts", c1},
      {"crypto known answers", c2},
      {"trust and candidate values", c3},
      {"tamper detection", c4},
      {"118-bus losslessness", c5},
      {"attack sweep trends", c6},
      {"reroute liveness", c7},
      {"determinism", c8},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.notes = std::string("exception: ") + e.what();
    }
    if (!o.ok) ++failed;
    std::printf("%s %d %s: %s\n", o.ok ? "PASS" : "FAIL", id, criteria[i].first,
                o.notes.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

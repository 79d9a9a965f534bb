#include "ciisim/topology.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ciisim {

const Substation& PowerCase::substation(SubstationId id) const {
  auto it = std::lower_bound(
      substations.begin(), substations.end(), id,
      [](const Substation& s, SubstationId v) { return s.id < v; });
  if (it == substations.end() || it->id != id)
    throw TopologyError("unknown substation " + std::to_string(id));
  return *it;
}

SubstationId PowerCase::substation_of(BusId bus) const {
  for (const auto& s : substations)
    if (std::binary_search(s.buses.begin(), s.buses.end(), bus)) return s.id;
  throw TopologyError("bus " + std::to_string(bus) + " has no substation");
}

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

int parse_int(const std::string& tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, std::string("expected integer ") + what + ", got '" +
                               tok + "'");
  }
}

double parse_double(const std::string& tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v))
      throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, std::string("expected number ") + what + ", got '" +
                               tok + "'");
  }
}

double cross(const Position& o, const Position& a, const Position& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

PowerCase parse_power_case(std::istream& in, std::string name) {
  PowerCase pc;
  pc.name = std::move(name);
  std::set<BusId> buses;
  std::set<SubstationId> sub_ids;
  std::map<BusId, int> bus_line;
  std::vector<std::pair<std::pair<BusId, BusId>, int>> branch_lines;
  std::vector<std::pair<int, int>> sub_bus_refs;  // (bus, line)

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ss(strip_comment(raw));
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    const std::string& kw = tok[0];
    if (kw == "bus") {
      if (tok.size() != 2) throw ParseError(lineno, "bus takes one id");
      const BusId b = parse_int(tok[1], lineno, "bus id");
      if (!buses.insert(b).second)
        throw ParseError(lineno, "duplicate bus " + std::to_string(b));
      bus_line[b] = lineno;
    } else if (kw == "branch") {
      if (tok.size() != 3) throw ParseError(lineno, "branch takes two bus ids");
      branch_lines.push_back({{parse_int(tok[1], lineno, "bus id"),
                               parse_int(tok[2], lineno, "bus id")},
                              lineno});
    } else if (kw == "substation") {
      if (tok.size() < 6 || tok[4] != ":")
        throw ParseError(lineno,
                         "expected 'substation <id> <x> <y> : <buses>'");
      Substation s;
      s.id = parse_int(tok[1], lineno, "substation id");
      s.position = {parse_double(tok[2], lineno, "x"),
                    parse_double(tok[3], lineno, "y")};
      for (std::size_t i = 5; i < tok.size(); ++i) {
        s.buses.push_back(parse_int(tok[i], lineno, "bus id"));
        sub_bus_refs.push_back({s.buses.back(), lineno});
      }
      std::sort(s.buses.begin(), s.buses.end());
      if (!sub_ids.insert(s.id).second)
        throw ParseError(lineno,
                         "duplicate substation id " + std::to_string(s.id));
      pc.substations.push_back(std::move(s));
    } else if (kw == "region_distance") {
      if (tok.size() != 2) throw ParseError(lineno, "region_distance takes one value");
      const double d = parse_double(tok[1], lineno, "distance");
      if (d <= 0) throw ParseError(lineno, "region_distance must be positive");
      pc.region_distance_km = d;
    } else {
      throw ParseError(lineno, "unknown record '" + kw + "'");
    }
  }

  for (const auto& [br, ln] : branch_lines) {
    for (BusId b : {br.first, br.second})
      if (!buses.count(b))
        throw ParseError(ln, "branch references unknown bus " + std::to_string(b));
    pc.branches.push_back(br);
  }
  std::map<BusId, int> owner_line;
  for (const auto& [b, ln] : sub_bus_refs) {
    if (!buses.count(b))
      throw ParseError(ln, "substation references unknown bus " + std::to_string(b));
    if (!owner_line.emplace(b, ln).second)
      throw ParseError(ln, "bus " + std::to_string(b) +
                               " assigned to more than one substation");
  }
  for (BusId b : buses)
    if (!owner_line.count(b))
      throw ParseError(bus_line[b],
                       "orphan bus " + std::to_string(b) + " has no substation");

  pc.buses.assign(buses.begin(), buses.end());
  std::sort(pc.substations.begin(), pc.substations.end(),
            [](const Substation& a, const Substation& b) { return a.id < b.id; });
  validate_power_case(pc);
  mark_border_substations(pc);
  return pc;
}

PowerCase load_power_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open case file " + path);
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos)
    stem = stem.substr(0, dot);
  return parse_power_case(in, stem);
}

void validate_power_case(const PowerCase& pc) {
  std::map<BusId, int> owners;
  std::set<SubstationId> ids;
  for (const auto& s : pc.substations) {
    if (!ids.insert(s.id).second)
      throw TopologyError("duplicate substation id " + std::to_string(s.id));
    if (s.buses.empty())
      throw TopologyError("substation " + std::to_string(s.id) + " has no buses");
    if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y))
      throw TopologyError("substation " + std::to_string(s.id) +
                          " has a non-finite position");
    for (BusId b : s.buses) ++owners[b];
  }
  for (BusId b : pc.buses)
    if (owners[b] != 1)
      throw TopologyError("bus " + std::to_string(b) +
                          " must belong to exactly one substation");
  for (const auto& [a, b] : pc.branches)
    if (!std::binary_search(pc.buses.begin(), pc.buses.end(), a) ||
        !std::binary_search(pc.buses.begin(), pc.buses.end(), b))
      throw TopologyError("branch endpoint is not a known bus");
  if (owners.size() != pc.buses.size())
    throw TopologyError("substation lists a bus that is not declared");
}

void mark_border_substations(PowerCase& pc) {
  for (auto& s : pc.substations) s.is_border = false;
  if (pc.substations.size() <= 2) {
    for (auto& s : pc.substations) s.is_border = true;
    return;
  }
  std::vector<std::size_t> idx(pc.substations.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto pos = [&](std::size_t i) { return pc.substations[i].position; };
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = pos(a), pb = pos(b);
    return pa.x != pb.x ? pa.x < pb.x : pa.y < pb.y;
  });
  // Andrew's monotone chain, collinear points excluded
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i : idx) {
    while (k >= 2 && cross(pos(hull[k - 2]), pos(hull[k - 1]), pos(i)) <= 0) --k;
    hull[k++] = i;
  }
  for (std::size_t j = idx.size() - 1, lower = k + 1; j-- > 0;) {
    const std::size_t i = idx[j];
    while (k >= lower && cross(pos(hull[k - 2]), pos(hull[k - 1]), pos(i)) <= 0)
      --k;
    hull[k++] = i;
  }
  for (std::size_t i = 0; i + 1 < k; ++i) pc.substations[hull[i]].is_border = true;
  if (k <= 1) pc.substations[idx.front()].is_border = true;
}

int substation_connectivity(const PowerCase& pc, SubstationId s) {
  const Substation& sub = pc.substation(s);
  std::set<SubstationId> reached;
  for (const auto& [a, b] : pc.branches) {
    const bool a_in = std::binary_search(sub.buses.begin(), sub.buses.end(), a);
    const bool b_in = std::binary_search(sub.buses.begin(), sub.buses.end(), b);
    if (a_in == b_in) continue;
    reached.insert(pc.substation_of(a_in ? b : a));
  }
  return static_cast<int>(reached.size());
}

ControlCenters select_control_centers(const PowerCase& pc) {
  if (pc.substations.size() < 2)
    throw TopologyError("control-center selection needs at least 2 substations");
  std::vector<std::pair<int, SubstationId>> ranked;
  for (const auto& s : pc.substations)
    ranked.push_back({-substation_connectivity(pc, s.id), s.id});
  std::sort(ranked.begin(), ranked.end());
  return {ranked[0].second, ranked[1].second};
}

double pairwise_distance(const Substation& a, const Substation& b) {
  return distance_km(a.position, b.position);
}

std::vector<Region> partition_regions(const PowerCase& pc,
                                      const RegionConfig& cfg) {
  if (!(cfg.distance_threshold_km > 0))
    throw TopologyError("region distance threshold must be positive");
  std::vector<Region> regions;
  if (pc.substations.empty()) return regions;

  const Substation* anchor = nullptr;
  int best = -1;
  for (const auto& s : pc.substations) {
    if (!s.is_border) continue;
    const int c = substation_connectivity(pc, s.id);
    if (c > best) {
      best = c;
      anchor = &s;
    }
  }
  if (!anchor) anchor = &pc.substations.front();

  std::set<SubstationId> unassigned;
  for (const auto& s : pc.substations) unassigned.insert(s.id);

  while (!unassigned.empty()) {
    Region r;
    r.id = static_cast<RegionId>(regions.size()) + 1;
    r.anchor = anchor->id;
    for (SubstationId id : unassigned)
      if (pairwise_distance(*anchor, pc.substation(id)) <= cfg.distance_threshold_km)
        r.members.push_back(id);
    for (SubstationId id : r.members) unassigned.erase(id);
    regions.push_back(std::move(r));
    if (unassigned.empty()) break;

    const Substation* next = nullptr;
    double next_d = 0;
    for (SubstationId id : unassigned) {
      const Substation& cand = pc.substation(id);
      const double d = pairwise_distance(*anchor, cand);
      if (!next || d < next_d) {
        next = &cand;
        next_d = d;
      }
    }
    anchor = next;
  }
  return regions;
}

std::set<BusId> place_pmus(const PowerCase& pc) {
  std::map<BusId, std::set<BusId>> closed;  // bus -> itself + neighbours
  for (BusId b : pc.buses) closed[b].insert(b);
  for (const auto& [a, b] : pc.branches) {
    closed[a].insert(b);
    closed[b].insert(a);
  }
  std::set<BusId> uncovered(pc.buses.begin(), pc.buses.end());
  std::set<BusId> placed;
  while (!uncovered.empty()) {
    BusId pick = 0;
    std::size_t gain = 0;
    for (const auto& [bus, nbhd] : closed) {
      std::size_t g = 0;
      for (BusId n : nbhd) g += uncovered.count(n);
      if (g > gain) {
        gain = g;
        pick = bus;
      }
    }
    placed.insert(pick);
    for (BusId n : closed[pick]) uncovered.erase(n);
  }
  return placed;
}

const char* role_name(Role r) {
  switch (r) {
    case Role::kGateway: return "Gateway";
    case Role::kRelayNode: return "RelayNode";
    case Role::kEhrn: return "EHRN";
    case Role::kRegionalSink: return "RS";
    case Role::kPdc: return "PDC";
    case Role::kCcGateway: return "CCGateway";
    case Role::kCcServer: return "CCServer";
    case Role::kMuSensor: return "MUSensor";
    case Role::kPmuSensor: return "PMUSensor";
    case Role::kRtu: return "RTU";
  }
  return "?";
}

bool is_wireless(Role r) { return r == Role::kRelayNode || r == Role::kEhrn; }

namespace {

Position centroid(const PowerCase& pc, const Region& r) {
  Position c;
  for (SubstationId id : r.members) {
    c.x += pc.substation(id).position.x;
    c.y += pc.substation(id).position.y;
  }
  c.x /= static_cast<double>(r.members.size());
  c.y /= static_cast<double>(r.members.size());
  return c;
}

}  // namespace

std::vector<DeployedNode> deploy_nodes(const TopologySkeleton& sk,
                                       const DeploymentCounts& counts,
                                       Rng& rng) {
  if (!sk.power_case) throw TopologyError("skeleton has no power case");
  if (counts.relays < 0 || counts.ehrns < 0)
    throw TopologyError("node counts must be non-negative");
  const PowerCase& pc = *sk.power_case;
  std::vector<DeployedNode> nodes;
  auto add = [&](Role role, Position pos) -> DeployedNode& {
    DeployedNode n;
    n.id = static_cast<NodeId>(nodes.size());
    n.role = role;
    n.position = pos;
    nodes.push_back(n);
    return nodes.back();
  };

  std::map<SubstationId, RegionId> region_of;
  for (const auto& r : sk.regions)
    for (SubstationId s : r.members) region_of[s] = r.id;

  for (const auto& s : pc.substations) {
    add(Role::kGateway, s.position).substation = s.id;
    nodes.back().region = region_of[s.id];
  }
  for (const auto& s : pc.substations) {
    add(Role::kRtu, s.position).substation = s.id;
    nodes.back().region = region_of[s.id];
  }
  for (const auto& s : pc.substations)
    for (BusId b : s.buses) {
      auto& n = add(Role::kMuSensor, s.position);
      n.substation = s.id;
      n.region = region_of[s.id];
      n.bus = b;
    }
  for (const auto& s : pc.substations)
    for (BusId b : s.buses)
      if (sk.pmu_buses.count(b)) {
        auto& n = add(Role::kPmuSensor, s.position);
        n.substation = s.id;
        n.region = region_of[s.id];
        n.bus = b;
      }
  for (const auto& r : sk.regions) add(Role::kRegionalSink, centroid(pc, r)).region = r.id;
  for (const auto& r : sk.regions) add(Role::kPdc, centroid(pc, r)).region = r.id;
  for (SubstationId cc : {sk.ccs.main, sk.ccs.backup})
    add(Role::kCcGateway, pc.substation(cc).position).substation = cc;
  for (SubstationId cc : {sk.ccs.main, sk.ccs.backup})
    add(Role::kCcServer, pc.substation(cc).position).substation = cc;

  double x0 = pc.substations.front().position.x, x1 = x0;
  double y0 = pc.substations.front().position.y, y1 = y0;
  for (const auto& s : pc.substations) {
    x0 = std::min(x0, s.position.x);
    x1 = std::max(x1, s.position.x);
    y0 = std::min(y0, s.position.y);
    y1 = std::max(y1, s.position.y);
  }
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  for (int i = 0; i < counts.relays; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    auto& n = add(Role::kRelayNode, {x, y});
    n.battery_j = counts.relay_battery_j;
  }
  for (int i = 0; i < counts.ehrns; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    auto& n = add(Role::kEhrn, {x, y});
    n.battery_j = counts.ehrn_battery_j;
    n.rechargeable = true;
  }
  return nodes;
}

std::vector<NodeId> build_rs_ring(const std::vector<NodeId>& sinks,
                                  const std::vector<DeployedNode>& nodes,
                                  NodeId main_gateway, NodeId backup_gateway) {
  std::vector<NodeId> ring{main_gateway};
  std::vector<NodeId> left = sinks;
  std::sort(left.begin(), left.end());
  Position cur = nodes.at(main_gateway).position;
  while (!left.empty()) {
    auto best = left.begin();
    for (auto it = left.begin(); it != left.end(); ++it)
      if (distance_km(cur, nodes.at(*it).position) <
          distance_km(cur, nodes.at(*best).position))
        best = it;
    ring.push_back(*best);
    cur = nodes.at(*best).position;
    left.erase(best);
  }
  ring.push_back(backup_gateway);
  return ring;
}

void Topology::index() {
  gateway_of.clear();
  region_of.clear();
  rs_of.clear();
  pdc_of.clear();
  main_cc_gateway = backup_cc_gateway = main_cc_server = backup_cc_server = kNoNode;
  for (const auto& r : regions)
    for (SubstationId s : r.members) region_of[s] = r.id;
  for (const auto& n : nodes) {
    switch (n.role) {
      case Role::kGateway: gateway_of[n.substation] = n.id; break;
      case Role::kRegionalSink: rs_of[n.region] = n.id; break;
      case Role::kPdc: pdc_of[n.region] = n.id; break;
      case Role::kCcGateway:
        (n.substation == main_cc ? main_cc_gateway : backup_cc_gateway) = n.id;
        break;
      case Role::kCcServer:
        (n.substation == main_cc ? main_cc_server : backup_cc_server) = n.id;
        break;
      default: break;
    }
  }
}

const Region& Topology::region(RegionId id) const {
  for (const auto& r : regions)
    if (r.id == id) return r;
  throw TopologyError("unknown region " + std::to_string(id));
}

Topology build_topology(const PowerCase& pc, const TopologyConfig& cfg,
                        Rng& rng) {
  Topology t;
  t.power_case = pc;
  const ControlCenters ccs = select_control_centers(t.power_case);
  t.main_cc = ccs.main;
  t.backup_cc = ccs.backup;
  t.regions = partition_regions(t.power_case, cfg.region);
  t.pmu_buses = place_pmus(t.power_case);

  TopologySkeleton sk{&t.power_case, ccs, t.regions, t.pmu_buses};
  t.nodes = deploy_nodes(sk, cfg.counts, rng);
  t.index();

  std::vector<NodeId> sinks, pdcs;
  for (const auto& r : t.regions) sinks.push_back(t.rs_of.at(r.id));
  t.rs_ring = build_rs_ring(sinks, t.nodes, t.main_cc_gateway, t.backup_cc_gateway);
  for (NodeId id : t.rs_ring)
    t.pdc_ring.push_back(t.nodes[id].role == Role::kRegionalSink
                             ? t.pdc_of.at(t.nodes[id].region)
                             : id);
  validate_topology(t);
  return t;
}

void validate_topology(const Topology& t) {
  if (t.main_cc == t.backup_cc) throw TopologyError("main and backup CC coincide");
  std::set<SubstationId> seen;
  for (const auto& r : t.regions) {
    if (r.members.empty()) throw TopologyError("empty region");
    if (!std::binary_search(r.members.begin(), r.members.end(), r.anchor))
      throw TopologyError("region anchor is not a member");
    for (SubstationId s : r.members)
      if (!seen.insert(s).second) throw TopologyError("regions overlap");
  }
  if (seen.size() != t.power_case.substations.size())
    throw TopologyError("regions do not cover all substations");
  if (t.rs_of.size() != t.regions.size() || t.pdc_of.size() != t.regions.size())
    throw TopologyError("need exactly one RS and one PDC per region");
  if (t.gateway_of.size() != t.power_case.substations.size())
    throw TopologyError("need one gateway per substation");
  if (t.rs_ring.size() != t.regions.size() + 2 ||
      t.rs_ring.front() != t.main_cc_gateway || t.rs_ring.back() != t.backup_cc_gateway)
    throw TopologyError("RS ring malformed");
  std::set<NodeId> ring_rs(t.rs_ring.begin() + 1, t.rs_ring.end() - 1);
  if (ring_rs.size() != t.regions.size()) throw TopologyError("RS ring repeats a sink");
  for (const auto& n : t.nodes) {
    if (n.role == Role::kRelayNode && n.rechargeable)
      throw TopologyError("relay nodes are not rechargeable");
    if (n.role == Role::kEhrn && !n.rechargeable)
      throw TopologyError("EHRNs are rechargeable");
  }
}

void export_edge_list(const Topology& t, std::ostream& out,
                      std::optional<double> radio_range_m) {
  out << "# topology " << t.power_case.name << "\n";
  out << "# main_cc " << t.main_cc << " backup_cc " << t.backup_cc
      << " regions " << t.regions.size() << "\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& n : t.nodes) {
    out << "node " << n.id << ' ' << role_name(n.role) << ' ' << n.position.x
        << ' ' << n.position.y;
    if (n.substation) out << " substation=" << n.substation;
    if (n.region) out << " region=" << n.region;
    if (n.bus) out << " bus=" << n.bus;
    out << "\n";
  }
  auto edge = [&](NodeId a, NodeId b, const char* kind) {
    out << "edge " << a << ' ' << b << ' ' << kind << "\n";
  };
  for (const auto* ring : {&t.rs_ring, &t.pdc_ring})
    for (std::size_t i = 0; i + 1 < ring->size(); ++i)
      edge((*ring)[i], (*ring)[i + 1], "optical");
  edge(t.main_cc_gateway, t.backup_cc_gateway, "optical");
  edge(t.main_cc_gateway, t.main_cc_server, "lan");
  edge(t.backup_cc_gateway, t.backup_cc_server, "lan");

  std::map<SubstationId, NodeId> rtu_of;
  for (const auto& n : t.nodes)
    if (n.role == Role::kRtu) rtu_of[n.substation] = n.id;
  for (const auto& n : t.nodes) {
    if (n.role == Role::kMuSensor) edge(n.id, rtu_of.at(n.substation), "local");
    if (n.role == Role::kRtu || n.role == Role::kPmuSensor)
      edge(n.id, t.gateway_of.at(n.substation), "local");
  }
  if (radio_range_m) {
    const double range_km = *radio_range_m / 1000.0;
    for (const auto& a : t.nodes) {
      const bool a_radio = is_wireless(a.role) || a.role == Role::kGateway ||
                           a.role == Role::kRegionalSink || a.role == Role::kPdc;
      if (!a_radio) continue;
      for (const auto& b : t.nodes) {
        if (b.id <= a.id || !(is_wireless(a.role) || is_wireless(b.role))) continue;
        if (!is_wireless(b.role) && !(b.role == Role::kGateway ||
                                      b.role == Role::kRegionalSink ||
                                      b.role == Role::kPdc))
          continue;
        if (distance_km(a.position, b.position) <= range_km) edge(a.id, b.id, "wireless");
      }
    }
  }
}

}  // namespace ciisim

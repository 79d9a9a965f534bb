#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "ciisim/topology.hpp"
#include "fixtures.hpp"

using namespace ciisim;

namespace {

PowerCase parse(const std::string& text) {
  std::istringstream in(text);
  return parse_power_case(in, "inline");
}

// buses 1..n, one substation per bus at (x=i, y=0) unless positions given
std::string single_bus_case(int n, const std::vector<std::pair<int, int>>& branches,
                            const std::vector<Position>& pos = {}) {
  std::ostringstream s;
  for (int i = 1; i <= n; ++i) s << "bus " << i << "\n";
  for (auto [a, b] : branches) s << "branch " << a << ' ' << b << "\n";
  for (int i = 1; i <= n; ++i) {
    const Position p = pos.empty() ? Position{double(i), 0.0} : pos[i - 1];
    s << "substation " << i << ' ' << p.x << ' ' << p.y << " : " << i << "\n";
  }
  return s.str();
}

// Smallest PMU sets by exhaustive search over bus subsets.
std::vector<std::set<BusId>> brute_force_min_pmus(const PowerCase& pc) {
  const int n = static_cast<int>(pc.buses.size());
  std::vector<std::set<BusId>> best;
  std::size_t best_size = SIZE_MAX;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::set<BusId> chosen;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) chosen.insert(pc.buses[i]);
    if (chosen.size() > best_size) continue;
    std::set<BusId> seen = chosen;
    for (auto [a, b] : pc.branches) {
      if (chosen.count(a)) seen.insert(b);
      if (chosen.count(b)) seen.insert(a);
    }
    if (seen.size() != pc.buses.size()) continue;
    if (chosen.size() < best_size) {
      best_size = chosen.size();
      best.clear();
    }
    best.push_back(chosen);
  }
  return best;
}

bool observes_all(const PowerCase& pc, const std::set<BusId>& pmus) {
  std::set<BusId> seen = pmus;
  for (auto [a, b] : pc.branches) {
    if (pmus.count(a)) seen.insert(b);
    if (pmus.count(b)) seen.insert(a);
  }
  return seen.size() == pc.buses.size();
}

}  // namespace

TEST_CASE("case parsing reports errors with line numbers") {
  try {
    parse("bus 1\nbus 2\nbranch 1 99\nsubstation 1 0 0 : 1 2\n");
    FAIL("accepted unknown bus");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("bus 1\nbus 2\nsubstation 1 0 0 : 1\n"), ParseError);
  CHECK_THROWS_AS(parse("bus 1\nbus 2\nsubstation 1 0 0 : 1\nsubstation 1 1 1 : 2\n"),
                  ParseError);
  CHECK_THROWS_AS(parse("bus 1\nbogus 3\n"), ParseError);
  CHECK_THROWS_AS(parse("bus x\n"), ParseError);
  const auto pc = parse("# comment\nbus 1 # trailing\n\nsubstation 4 1.5 2 : 1\n");
  CHECK(pc.substations.size() == 1);
  CHECK(pc.substation(4).position == Position{1.5, 2.0});
}

TEST_CASE("fixture cases load with the expected substation counts") {
  const auto c14 = load_power_case(test::source_path("data/cases/ieee14.case"));
  CHECK(c14.substations.size() == 11);
  CHECK(c14.buses.size() == 14);
  CHECK(c14.branches.size() == 20);
  const auto c118 = load_power_case(test::source_path("data/cases/ieee118.case"));
  CHECK(c118.substations.size() == 107);
  CHECK(c118.buses.size() == 118);
  CHECK(c118.branches.size() == 186);
  CHECK(c118.substation(61).buses == std::vector<BusId>{68, 69, 116});
  CHECK(c118.substation(16).buses == std::vector<BusId>{17, 30});
}

TEST_CASE("substation connectivity counts distinct neighbouring substations") {
  const auto line = parse(single_bus_case(3, {{1, 2}, {2, 3}}));
  CHECK(substation_connectivity(line, 2) == 2);
  CHECK(substation_connectivity(line, 1) == 1);

  const auto iso = parse(single_bus_case(3, {{1, 2}}));
  CHECK(substation_connectivity(iso, 3) == 0);

  const auto parallel = parse(single_bus_case(2, {{1, 2}, {1, 2}}));
  CHECK(substation_connectivity(parallel, 1) == 1);

  const auto grouped =
      parse("bus 1\nbus 2\nbus 3\nbranch 1 3\nbranch 2 3\nbranch 1 2\n"
            "substation 1 0 0 : 1 2\nsubstation 2 1 0 : 3\n");
  CHECK(substation_connectivity(grouped, 1) == 1);
  CHECK_THROWS_AS(substation_connectivity(grouped, 9), TopologyError);
}

TEST_CASE("control center selection") {
  const auto line = parse(single_bus_case(3, {{1, 2}, {2, 3}}));
  const auto cc = select_control_centers(line);
  CHECK(cc.main == 2);
  CHECK(cc.backup == 1);
  CHECK_THROWS_AS(select_control_centers(parse("bus 1\nsubstation 1 0 0 : 1\n")),
                  TopologyError);

  const auto c14 = load_power_case(test::source_path("data/cases/ieee14.case"));
  CHECK(select_control_centers(c14).main == 1);
  CHECK(select_control_centers(c14).backup == 2);
  const auto c118 = load_power_case(test::source_path("data/cases/ieee118.case"));
  CHECK(select_control_centers(c118).main == 61);
  CHECK(select_control_centers(c118).backup == 16);
}

TEST_CASE("control center selection ignores substation order in the file") {
  std::ifstream in(test::source_path("data/cases/ieee118.case"));
  std::vector<std::string> head, subs;
  for (std::string l; std::getline(in, l);)
    (l.rfind("substation", 0) == 0 ? subs : head).push_back(l);
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(subs.begin(), subs.end(), rng);
    std::ostringstream s;
    for (auto& l : head) s << l << "\n";
    for (auto& l : subs) s << l << "\n";
    const auto cc = select_control_centers(parse(s.str()));
    CHECK(cc.main == 61);
    CHECK(cc.backup == 16);
  }
}

TEST_CASE("pairwise distance") {
  Substation a, b;
  b.position = {3, 4};
  CHECK(pairwise_distance(a, b) == doctest::Approx(5.0));
  CHECK(pairwise_distance(b, a) == doctest::Approx(5.0));
  CHECK(pairwise_distance(a, a) == 0.0);
  a.position = {1, 1};
  b.position = {4, 5};
  CHECK(pairwise_distance(a, b) == doctest::Approx(5.0));
}

TEST_CASE("border substations are the convex hull vertices") {
  const auto c14 = load_power_case(test::source_path("data/cases/ieee14.case"));
  std::vector<SubstationId> border;
  for (const auto& s : c14.substations)
    if (s.is_border) border.push_back(s.id);
  CHECK(border == std::vector<SubstationId>{3, 4, 5, 10});
  // collinear middle point is not a hull vertex
  const auto line = parse(single_bus_case(3, {}));
  CHECK(line.substation(1).is_border);
  CHECK_FALSE(line.substation(2).is_border);
  CHECK(line.substation(3).is_border);
}

TEST_CASE("region partition") {
  const auto pc = parse(single_bus_case(4, {{1, 2}, {2, 3}, {3, 4}},
                                        {{0, 0}, {1, 0}, {2, 0}, {3, 0}}));
  CHECK(partition_regions(pc, {100.0}).size() == 1);
  CHECK(partition_regions(pc, {0.5}).size() == 4);
  CHECK_THROWS_AS(partition_regions(pc, {0.0}), TopologyError);

  const auto c14 = load_power_case(test::source_path("data/cases/ieee14.case"));
  const auto r14 = partition_regions(c14, {*c14.region_distance_km});
  CHECK(r14.size() == 3);
  CHECK(r14.front().anchor == 4);

  const auto c118 = load_power_case(test::source_path("data/cases/ieee118.case"));
  const double d = *c118.region_distance_km;
  const auto r118 = partition_regions(c118, {d});
  CHECK(r118.size() == 8);

  for (const auto* pcase : {&c14, &c118}) {
    for (double dist : {0.3, 1.0, 1.785, 2.5, 6.3, 50.0}) {
      const auto regions = partition_regions(*pcase, {dist});
      std::set<SubstationId> all;
      std::size_t total = 0;
      for (const auto& r : regions) {
        CHECK(std::binary_search(r.members.begin(), r.members.end(), r.anchor));
        for (SubstationId s : r.members) {
          CHECK(pairwise_distance(pcase->substation(r.anchor), pcase->substation(s)) <= dist);
          all.insert(s);
        }
        total += r.members.size();
      }
      CHECK(total == pcase->substations.size());
      CHECK(all.size() == pcase->substations.size());
    }
  }
}

TEST_CASE("greedy PMU placement") {
  const auto single = parse(single_bus_case(1, {}));
  CHECK(place_pmus(single) == std::set<BusId>{1});

  const auto path = parse(single_bus_case(3, {{1, 2}, {2, 3}}));
  const auto oracle_path = brute_force_min_pmus(path);
  REQUIRE(oracle_path.size() == 1);
  CHECK(oracle_path.front() == std::set<BusId>{2});
  CHECK(place_pmus(path) == std::set<BusId>{2});

  const auto k4 = parse(single_bus_case(4, {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}));
  const auto oracle_k4 = brute_force_min_pmus(k4);
  CHECK(oracle_k4.front().size() == 1);
  CHECK(oracle_k4.front() == std::set<BusId>{1});
  CHECK(place_pmus(k4) == std::set<BusId>{1});

  // random small graphs: coverage and determinism
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<std::pair<int, int>> br;
    for (int a = 1; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b)
        if (rng() % 3 == 0) br.push_back({a, b});
    const auto pc = parse(single_bus_case(n, br));
    const auto pmus = place_pmus(pc);
    CHECK(observes_all(pc, pmus));
    CHECK(place_pmus(pc) == pmus);
  }

  for (const char* f : {"data/cases/ieee14.case", "data/cases/ieee118.case"}) {
    const auto pc = load_power_case(test::source_path(f));
    CHECK(observes_all(pc, place_pmus(pc)));
  }
}

TEST_CASE("node deployment") {
  const auto pc = load_power_case(test::source_path("data/cases/ieee118.case"));
  TopologySkeleton sk{&pc, select_control_centers(pc),
                      partition_regions(pc, {*pc.region_distance_km}), place_pmus(pc)};

  auto count = [](const std::vector<DeployedNode>& ns, Role r) {
    return std::count_if(ns.begin(), ns.end(), [r](const auto& n) { return n.role == r; });
  };

  Rng r0(1);
  const auto bare = deploy_nodes(sk, {0, 0}, r0);
  CHECK(count(bare, Role::kRelayNode) == 0);
  CHECK(count(bare, Role::kEhrn) == 0);
  CHECK(count(bare, Role::kGateway) == 107);

  Rng r1(42), r2(42), r3(43);
  const auto a = deploy_nodes(sk, {1500, 500}, r1);
  const auto b = deploy_nodes(sk, {1500, 500}, r2);
  const auto c = deploy_nodes(sk, {1500, 500}, r3);
  CHECK(count(a, Role::kRelayNode) == 1500);
  CHECK(count(a, Role::kEhrn) == 500);
  CHECK(count(a, Role::kGateway) == 107);
  CHECK(count(a, Role::kRegionalSink) == 8);
  CHECK(count(a, Role::kPdc) == 8);
  CHECK(count(a, Role::kCcGateway) == 2);
  CHECK(count(a, Role::kCcServer) == 2);
  CHECK(count(a, Role::kMuSensor) == 118);
  CHECK(count(a, Role::kRtu) == 107);

  bool identical = true, infra_same = true, relays_differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    identical &= a[i].position == b[i].position && a[i].role == b[i].role;
    if (!is_wireless(a[i].role))
      infra_same &= a[i].position == c[i].position;
    else
      relays_differ |= !(a[i].position == c[i].position);
  }
  CHECK(identical);
  CHECK(infra_same);
  CHECK(relays_differ);
  for (const auto& n : a) {
    if (n.role == Role::kRelayNode) CHECK_FALSE(n.rechargeable);
    if (n.role == Role::kEhrn) CHECK(n.rechargeable);
    if (n.role == Role::kRegionalSink || n.role == Role::kPdc || n.role == Role::kCcGateway ||
        n.role == Role::kCcServer)
      CHECK(n.battery_j == kUnboundedEnergy);
  }
}

TEST_CASE("RS ring construction") {
  std::vector<DeployedNode> nodes(6);
  for (int i = 0; i < 6; ++i) nodes[i].id = i;
  nodes[0].position = {0, 0};   // main gw
  nodes[1].position = {0, 1};   // backup gw
  nodes[2].position = {3, 0};   // RS
  nodes[3].position = {1, 0};   // RS
  nodes[4].position = {2, 0};   // RS
  CHECK(build_rs_ring({2}, nodes, 0, 1) == std::vector<NodeId>{0, 2, 1});

  // brute-force shortest open tour from the main gateway over the three RSs
  std::vector<NodeId> perm{2, 3, 4}, best;
  double best_len = 1e18;
  do {
    double len = 0;
    Position cur = nodes[0].position;
    for (NodeId id : perm) {
      len += distance_km(cur, nodes[id].position);
      cur = nodes[id].position;
    }
    if (len < best_len) {
      best_len = len;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  const auto ring = build_rs_ring({2, 3, 4}, nodes, 0, 1);
  CHECK(std::vector<NodeId>(ring.begin() + 1, ring.end() - 1) == best);

  const auto pc = load_power_case(test::source_path("data/cases/ieee118.case"));
  Rng rng(5);
  const auto topo = build_topology(pc, {{*pc.region_distance_km}, {100, 50}}, rng);
  CHECK(topo.rs_ring.size() == 10);
  CHECK(topo.pdc_ring.size() == 10);
  CHECK(topo.rs_ring.front() == topo.main_cc_gateway);
  CHECK(topo.rs_ring.back() == topo.backup_cc_gateway);
}

TEST_CASE("edge list export") {
  const auto pc = load_power_case(test::source_path("data/cases/ieee14.case"));
  Rng rng(5);
  const auto topo = build_topology(pc, {{*pc.region_distance_km}, {20, 10}}, rng);
  std::ostringstream out;
  export_edge_list(topo, out);
  const std::string text = out.str();
  std::size_t nodes = 0, optical = 0;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (l.rfind("node ", 0) == 0) ++nodes;
    if (l.find(" optical") != std::string::npos) ++optical;
  }
  CHECK(nodes == topo.nodes.size());
  // 3 RS + 2 gw -> 4 ring links, same for PDCs, plus the main-backup link
  CHECK(optical == 9);
  CHECK(text.find("CCServer") != std::string::npos);
}

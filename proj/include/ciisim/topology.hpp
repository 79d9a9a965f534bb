#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ciisim/geometry.hpp"
#include "ciisim/rng.hpp"

namespace ciisim {

using BusId = int;
using SubstationId = int;
using RegionId = int;
using NodeId = int;

inline constexpr NodeId kNoNode = -1;

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Substation {
  SubstationId id = 0;
  std::vector<BusId> buses;  // sorted
  Position position;
  bool is_border = false;
};

struct PowerCase {
  std::string name;
  std::vector<BusId> buses;  // sorted
  std::vector<std::pair<BusId, BusId>> branches;
  std::vector<Substation> substations;  // sorted by id
  /// Optional calibrated region threshold carried by the case file.
  std::optional<double> region_distance_km;

  const Substation& substation(SubstationId id) const;
  SubstationId substation_of(BusId bus) const;
};

/// Parses the line-oriented case format:
///   bus <id>
///   branch <bus> <bus>
///   substation <id> <x_km> <y_km> : <bus> <bus> ...
///   region_distance <km>            (optional)
/// '#' starts a comment. Border flags are derived from the convex hull.
PowerCase parse_power_case(std::istream& in, std::string name);
PowerCase load_power_case(const std::string& path);

/// Checks bus/branch/substation invariants; throws TopologyError.
void validate_power_case(const PowerCase& pc);

/// Marks the substations at the vertices of the convex hull of positions.
void mark_border_substations(PowerCase& pc);

int substation_connectivity(const PowerCase& pc, SubstationId s);

struct ControlCenters {
  SubstationId main = 0;
  SubstationId backup = 0;
};

ControlCenters select_control_centers(const PowerCase& pc);

double pairwise_distance(const Substation& a, const Substation& b);

struct RegionConfig {
  double distance_threshold_km = 1.0;
};

struct Region {
  RegionId id = 0;
  SubstationId anchor = 0;
  std::vector<SubstationId> members;  // sorted
};

std::vector<Region> partition_regions(const PowerCase& pc,
                                      const RegionConfig& cfg);

/// Greedy observability cover: every bus hosts a PMU or is adjacent to one.
std::set<BusId> place_pmus(const PowerCase& pc);

enum class Role {
  kGateway,
  kRelayNode,
  kEhrn,
  kRegionalSink,
  kPdc,
  kCcGateway,
  kCcServer,
  kMuSensor,
  kPmuSensor,
  kRtu,
};

const char* role_name(Role r);
bool is_wireless(Role r);  // battery-powered relays that join the radio mesh

inline constexpr double kUnboundedEnergy =
    std::numeric_limits<double>::infinity();

struct DeployedNode {
  NodeId id = kNoNode;
  Role role = Role::kGateway;
  Position position;
  double battery_j = kUnboundedEnergy;
  bool rechargeable = false;
  SubstationId substation = 0;  // 0 when not tied to a substation
  RegionId region = 0;          // 0 when not tied to a region
  BusId bus = 0;                // sensors only
};

struct DeploymentCounts {
  int relays = 0;
  int ehrns = 0;
  double relay_battery_j = 10.0;
  double ehrn_battery_j = 10.0;
};

/// Everything fixed before random deployment.
struct TopologySkeleton {
  const PowerCase* power_case = nullptr;
  ControlCenters ccs;
  std::vector<Region> regions;
  std::set<BusId> pmu_buses;
};

/// Infrastructure nodes are laid out in a fixed order independent of the
/// generator; relays and EHRNs follow, uniform over the substation bounding
/// box.
std::vector<DeployedNode> deploy_nodes(const TopologySkeleton& skeleton,
                                       const DeploymentCounts& counts,
                                       Rng& rng);

/// Nearest-neighbour tour from the main CC gateway through every RS, closed
/// through the backup CC gateway. Returned as [main, rs..., backup]; the
/// backup links back to the main.
std::vector<NodeId> build_rs_ring(const std::vector<NodeId>& sinks,
                                  const std::vector<DeployedNode>& nodes,
                                  NodeId main_gateway, NodeId backup_gateway);

struct TopologyConfig {
  RegionConfig region;
  DeploymentCounts counts;
};

struct Topology {
  PowerCase power_case;
  SubstationId main_cc = 0;
  SubstationId backup_cc = 0;
  std::vector<Region> regions;
  std::set<BusId> pmu_buses;
  std::vector<DeployedNode> nodes;
  std::vector<NodeId> rs_ring;
  std::vector<NodeId> pdc_ring;  // same order as rs_ring, PDCs in RS slots

  // lookup tables filled by index()
  std::map<SubstationId, NodeId> gateway_of;
  std::map<SubstationId, RegionId> region_of;
  std::map<RegionId, NodeId> rs_of;
  std::map<RegionId, NodeId> pdc_of;
  NodeId main_cc_gateway = kNoNode;
  NodeId backup_cc_gateway = kNoNode;
  NodeId main_cc_server = kNoNode;
  NodeId backup_cc_server = kNoNode;

  void index();
  const Region& region(RegionId id) const;
};

Topology build_topology(const PowerCase& pc, const TopologyConfig& cfg,
                        Rng& rng);

/// Checks the structural invariants of a built topology; throws
/// TopologyError.
void validate_topology(const Topology& topo);

/// Text export: one `node` line per node, one `edge` line per fixed link
/// (optical ring, LAN, intra-substation). Wireless edges are added when
/// radio_range_m is given.
void export_edge_list(const Topology& topo, std::ostream& out,
                      std::optional<double> radio_range_m = std::nullopt);

}  // namespace ciisim

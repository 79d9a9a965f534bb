#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "ciisim/topology.hpp"

namespace ciisim::engine {

using SimTime = double;  // seconds

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Discrete-event queue. Events fire in (fire_at, insertion sequence) order,
/// so equal-time events run in the order they were scheduled.
class EventQueue {
 public:
  using Action = std::function<void()>;

  /// Throws SchedulingError when fire_at < now().
  std::uint64_t schedule(SimTime fire_at, Action action);
  std::uint64_t schedule_in(SimTime delay, Action action) {
    return schedule(now_ + delay, std::move(action));
  }

  /// Runs every event with fire_at <= t_end and leaves the clock at t_end
  /// (or later if it was already past). Returns the number processed.
  std::size_t run_until(SimTime t_end);

  SimTime now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Event {
    SimTime fire_at;
    std::uint64_t sequence;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.sequence > b.sequence;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  SimTime now_ = 0.0;
  std::uint64_t next_sequence_ = 0;
};

struct RadioModel {
  double range_m = 600.0;
  double mac_latency_s = 0.002;
  double bitrate_bps = 250'000.0;

  double hop_latency(std::size_t bits) const {
    return mac_latency_s + static_cast<double>(bits) / bitrate_bps;
  }
};

/// First-order radio model: transmit e_elec*k + e_amp*k*d^2, receive e_elec*k.
struct EnergyModel {
  double e_elec_j_per_bit = 50e-9;
  double e_amp_j_per_bit_m2 = 10e-12;
  double ehrn_capacity_j = 50.0;
  double ehrn_recharge_w = 0.2;
  /// A flat EHRN stays down until it has harvested this share of capacity.
  double ehrn_wake_fraction = 0.1;

  double tx_cost(std::size_t bits, double distance_m) const {
    const double k = static_cast<double>(bits);
    return e_elec_j_per_bit * k + e_amp_j_per_bit_m2 * k * distance_m * distance_m;
  }
  double rx_cost(std::size_t bits) const {
    return e_elec_j_per_bit * static_cast<double>(bits);
  }
};

enum class RadioAction { kTransmit, kReceive };

/// Battery of one node. Wired roles are unbounded and never change.
struct EnergyState {
  double battery_j = 0.0;
  double initial_j = 0.0;
  double capacity_j = 0.0;
  bool rechargeable = false;
  bool unbounded = false;
  double consumed_j = 0.0;      // sum of every logged cost actually drawn
  SimTime last_recharge = 0.0;  // for lazy harvesting
  bool depleted = false;        // rechargeable node waiting to wake

  static EnergyState wired();
  static EnergyState battery(double initial_j, double capacity_j,
                             bool rechargeable);
  /// Unbounded unless the node is a relay or EHRN.
  static EnergyState for_node(const DeployedNode& node, const EnergyModel& model);

  bool alive() const { return unbounded || (battery_j > 0.0 && !depleted); }
  /// Percent of the initial charge, for candidate scoring.
  double percent() const;
};

/// Draws the action's cost; the battery floors at zero and the amount
/// actually drawn is returned. A node at 0 J is dead.
double consume_energy(EnergyState& node, const EnergyModel& model,
                      RadioAction action, std::size_t bits, double distance_m);

/// battery = min(capacity, battery + recharge_w * dt); a depleted node wakes
/// once it reaches ehrn_wake_fraction of capacity. Throws
/// std::logic_error for non-rechargeable nodes.
void recharge(EnergyState& node, const EnergyModel& model, double dt);

/// Static unit-disk adjacency among radio-capable nodes (relays, EHRNs and
/// the gateways/sinks that talk to them). Liveness is applied at query time.
class RadioMesh {
 public:
  RadioMesh(const std::vector<DeployedNode>& nodes, const RadioModel& radio);

  /// Wireless nodes within range of `node` (inclusive), regardless of
  /// liveness, sorted by id.
  const std::vector<NodeId>& in_range(NodeId node) const {
    return adjacency_.at(static_cast<std::size_t>(node));
  }
  bool within_range(const DeployedNode& a, const DeployedNode& b) const;
  double range_m() const { return range_m_; }

 private:
  double range_m_;
  std::vector<std::vector<NodeId>> adjacency_;
};

bool is_radio_endpoint(Role r);

/// Alive wireless nodes within range of `node`.
std::vector<NodeId> neighbors(NodeId node, const RadioMesh& mesh,
                              const std::function<bool(NodeId)>& alive);

}  // namespace ciisim::engine

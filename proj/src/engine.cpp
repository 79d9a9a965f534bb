#include "ciisim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ciisim::engine {

std::uint64_t EventQueue::schedule(SimTime fire_at, Action action) {
  if (fire_at < now_ || std::isnan(fire_at))
    throw SchedulingError("cannot schedule at t=" + std::to_string(fire_at) +
                          " before now=" + std::to_string(now_));
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Event{fire_at, seq, std::move(action)});
  return seq;
}

std::size_t EventQueue::run_until(SimTime t_end) {
  std::size_t processed = 0;
  while (!queue_.empty() && queue_.top().fire_at <= t_end) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.fire_at;
    ev.action();
    ++processed;
  }
  if (t_end > now_) now_ = t_end;
  return processed;
}

EnergyState EnergyState::wired() {
  EnergyState s;
  s.unbounded = true;
  s.battery_j = s.initial_j = s.capacity_j = kUnboundedEnergy;
  return s;
}

EnergyState EnergyState::battery(double initial_j, double capacity_j,
                                 bool rechargeable) {
  EnergyState s;
  s.battery_j = s.initial_j = initial_j;
  s.capacity_j = capacity_j;
  s.rechargeable = rechargeable;
  return s;
}

EnergyState EnergyState::for_node(const DeployedNode& node,
                                  const EnergyModel& model) {
  if (!is_wireless(node.role)) return wired();
  if (node.rechargeable)
    return battery(node.battery_j, std::max(model.ehrn_capacity_j, node.battery_j), true);
  return battery(node.battery_j, node.battery_j, false);
}

double EnergyState::percent() const {
  if (unbounded) return 100.0;
  if (initial_j <= 0.0) return 0.0;
  return std::clamp(100.0 * battery_j / initial_j, 0.0, 100.0);
}

double consume_energy(EnergyState& node, const EnergyModel& model,
                      RadioAction action, std::size_t bits, double distance_m) {
  if (node.unbounded || bits == 0) return 0.0;
  const double cost = action == RadioAction::kTransmit
                          ? model.tx_cost(bits, distance_m)
                          : model.rx_cost(bits);
  const double drawn = std::min(cost, node.battery_j);
  node.battery_j -= drawn;
  if (node.battery_j < 0.0) node.battery_j = 0.0;
  node.consumed_j += drawn;
  if (node.battery_j == 0.0 && node.rechargeable) node.depleted = true;
  return drawn;
}

void recharge(EnergyState& node, const EnergyModel& model, double dt) {
  if (!node.rechargeable)
    throw std::logic_error("recharge called on a non-rechargeable node");
  if (dt <= 0.0) return;
  node.battery_j = std::min(node.capacity_j, node.battery_j + model.ehrn_recharge_w * dt);
  if (node.depleted && node.battery_j >= model.ehrn_wake_fraction * node.capacity_j)
    node.depleted = false;
}

bool is_radio_endpoint(Role r) {
  return is_wireless(r) || r == Role::kGateway || r == Role::kRegionalSink ||
         r == Role::kPdc;
}

RadioMesh::RadioMesh(const std::vector<DeployedNode>& nodes,
                     const RadioModel& radio)
    : range_m_(radio.range_m), adjacency_(nodes.size()) {
  const double cell = std::max(range_m_ / 1000.0, 1e-9);
  std::map<std::pair<long, long>, std::vector<NodeId>> grid;
  auto key = [&](const Position& p) {
    return std::pair<long, long>{static_cast<long>(std::floor(p.x / cell)),
                                 static_cast<long>(std::floor(p.y / cell))};
  };
  for (const auto& n : nodes)
    if (is_wireless(n.role)) grid[key(n.position)].push_back(n.id);

  for (const auto& n : nodes) {
    if (!is_radio_endpoint(n.role)) continue;
    auto [cx, cy] = key(n.position);
    auto& out = adjacency_[static_cast<std::size_t>(n.id)];
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find({cx + dx, cy + dy});
        if (it == grid.end()) continue;
        for (NodeId other : it->second)
          if (other != n.id && within_range(n, nodes[static_cast<std::size_t>(other)]))
            out.push_back(other);
      }
    std::sort(out.begin(), out.end());
  }
}

bool RadioMesh::within_range(const DeployedNode& a, const DeployedNode& b) const {
  return distance_km(a.position, b.position) <= range_m_ / 1000.0;
}

std::vector<NodeId> neighbors(NodeId node, const RadioMesh& mesh,
                              const std::function<bool(NodeId)>& alive) {
  std::vector<NodeId> out;
  for (NodeId n : mesh.in_range(node))
    if (alive(n)) out.push_back(n);
  return out;
}

}  // namespace ciisim::engine

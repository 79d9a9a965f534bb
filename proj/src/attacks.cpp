#include "ciisim/attacks.hpp"

#include <algorithm>
#include <string>

namespace ciisim::attacks {

const char* behavior_name(Behavior b) {
  switch (b) {
    case Behavior::kHonest: return "honest";
    case Behavior::kBlackhole: return "blackhole";
    case Behavior::kGrayhole: return "grayhole";
    case Behavior::kTamper: return "tamper";
  }
  return "?";
}

std::size_t AttackPlan::attacked_count() const {
  return static_cast<std::size_t>(std::count_if(
      behavior.begin(), behavior.end(),
      [](const NodeBehavior& b) { return b.kind != Behavior::kHonest; }));
}

namespace {

void require_wireless(const Topology& topo, NodeId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= topo.nodes.size())
    throw AttackConfigError("attack names unknown node " + std::to_string(id));
  const Role r = topo.nodes[static_cast<std::size_t>(id)].role;
  if (!is_wireless(r))
    throw AttackConfigError("attack names " + std::string(role_name(r)) + " node " +
                            std::to_string(id) + "; only relays and EHRNs can be attacked");
}

}  // namespace

AttackPlan apply_attack(const Topology& topo, const AttackConfig& config, Rng& rng) {
  if (config.compromised_count < 0 || config.malicious_count < 0)
    throw AttackConfigError("attack counts must be non-negative");
  if (config.activation_time < 0.0)
    throw AttackConfigError("activation time must be non-negative");

  AttackPlan plan;
  plan.behavior.resize(topo.nodes.size());
  plan.activation_time = config.activation_time;

  for (NodeId id : config.blackhole_nodes) {
    require_wireless(topo, id);
    plan.behavior[static_cast<std::size_t>(id)] = {Behavior::kBlackhole, 1.0};
  }
  for (auto [id, p] : config.grayhole) {
    require_wireless(topo, id);
    if (!(p > 0.0 && p < 1.0))
      throw AttackConfigError("grayhole probability must lie in (0, 1)");
    auto& b = plan.behavior[static_cast<std::size_t>(id)];
    if (b.kind == Behavior::kHonest) b = {Behavior::kGrayhole, p};
  }
  for (NodeId id : config.tamper_nodes) {
    require_wireless(topo, id);
    auto& b = plan.behavior[static_cast<std::size_t>(id)];
    if (b.kind == Behavior::kHonest) b = {Behavior::kTamper, 0.0};
  }

  const int wanted = config.compromised_count + config.malicious_count;
  if (wanted == 0) return plan;

  std::vector<NodeId> pool;
  for (const auto& n : topo.nodes)
    if (n.role == Role::kRelayNode &&
        plan.behavior[static_cast<std::size_t>(n.id)].kind == Behavior::kHonest)
      pool.push_back(n.id);
  if (static_cast<std::size_t>(wanted) > pool.size())
    throw AttackConfigError("asked for " + std::to_string(wanted) +
                            " attacked relays but only " + std::to_string(pool.size()) +
                            " are available");
  std::shuffle(pool.begin(), pool.end(), rng);

  for (int i = 0; i < wanted; ++i) {
    const NodeId id = pool[static_cast<std::size_t>(i)];
    if (i < config.compromised_count) {
      plan.behavior[static_cast<std::size_t>(id)] = {Behavior::kBlackhole, 1.0};
      plan.compromised.push_back(id);
    } else {
      plan.behavior[static_cast<std::size_t>(id)] = {Behavior::kTamper, 0.0};
      plan.malicious.push_back(id);
    }
  }
  return plan;
}

bool tamper(protocol::Packet& packet, Rng& rng) {
  if (!protocol::carries_ciphertext(packet.kind) || packet.ciphertext.empty())
    return false;
  std::uniform_int_distribution<std::size_t> pick(0, packet.ciphertext.size() * 8 - 1);
  const std::size_t bit = pick(rng);
  packet.ciphertext[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  return true;
}

}  // namespace ciisim::attacks

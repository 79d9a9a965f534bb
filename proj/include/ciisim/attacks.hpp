#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "ciisim/protocol/messages.hpp"
#include "ciisim/rng.hpp"
#include "ciisim/topology.hpp"

namespace ciisim::attacks {

class AttackConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AttackConfig {
  std::set<NodeId> blackhole_nodes;
  std::map<NodeId, double> grayhole;  // drop probability in (0, 1)
  std::set<NodeId> tamper_nodes;
  int compromised_count = 0;  // random relays turned into blackholes
  int malicious_count = 0;    // random relays turned into tamperers
  double activation_time = 0.0;

  bool empty() const {
    return blackhole_nodes.empty() && grayhole.empty() && tamper_nodes.empty() &&
           compromised_count == 0 && malicious_count == 0;
  }
};

enum class Behavior { kHonest, kBlackhole, kGrayhole, kTamper };

const char* behavior_name(Behavior b);

struct NodeBehavior {
  Behavior kind = Behavior::kHonest;
  double drop_probability = 0.0;
};

/// Per-node behaviours for one run, indexed by node id.
struct AttackPlan {
  std::vector<NodeBehavior> behavior;
  double activation_time = 0.0;
  std::vector<NodeId> compromised;  // random blackholes, selection order
  std::vector<NodeId> malicious;    // random tamperers, selection order

  const NodeBehavior& of(NodeId id) const {
    return behavior.at(static_cast<std::size_t>(id));
  }
  std::size_t attacked_count() const;
};

/// Assigns behaviours. Random picks come from one shuffle of the honest
/// relays: the first compromised_count become blackholes and the next
/// malicious_count tamperers, so growing a count only adds nodes.
AttackPlan apply_attack(const Topology& topo, const AttackConfig& config, Rng& rng);

/// Flips one uniformly chosen ciphertext bit. Packets without ciphertext
/// pass through unchanged. Returns whether a bit was flipped.
bool tamper(protocol::Packet& packet, Rng& rng);

}  // namespace ciisim::attacks

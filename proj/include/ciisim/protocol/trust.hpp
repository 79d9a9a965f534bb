#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ciisim/crypto/ec.hpp"
#include "ciisim/topology.hpp"

namespace ciisim::protocol {

using crypto::SharedSecret;

class RouteUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// TV = 100 * delivered / sent, 0 while nothing has been sent.
double trust_value(std::uint64_t sent, std::uint64_t delivered);

struct TrustRecord {
  NodeId node = kNoNode;
  std::uint64_t msgs_sent = 0;
  std::uint64_t msgs_delivered = 0;

  double trust_value() const { return protocol::trust_value(msgs_sent, msgs_delivered); }
};

struct NodeProtocolState {
  double battery_pct = 0.0;  // BP, [0, 100]
  double trust = 0.0;        // TV, [0, 100]
  int connectivity = 0;      // Cn, alive wireless neighbours
  Role role = Role::kRelayNode;
  std::map<NodeId, SharedSecret> shared_secrets;
  std::optional<NodeId> cluster_head_of;
};

/// CV = BP * TV * Cn.
double candidate_value(const NodeProtocolState& s);
double candidate_value(double battery_pct, double trust, int connectivity);

struct ScoredCandidate {
  NodeId id = kNoNode;
  double cv = 0.0;
};

/// Argmax of CV over candidates with CV > 0, lowest id on ties. Throws
/// RouteUnavailable when none qualifies.
NodeId elect_cluster_head(const std::vector<ScoredCandidate>& candidates);

}  // namespace ciisim::protocol

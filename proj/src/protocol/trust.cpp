#include "ciisim/protocol/trust.hpp"

namespace ciisim::protocol {

double trust_value(std::uint64_t sent, std::uint64_t delivered) {
  if (sent == 0) return 0.0;
  if (delivered > sent) throw std::invalid_argument("delivered exceeds sent");
  return 100.0 * static_cast<double>(delivered) / static_cast<double>(sent);
}

double candidate_value(double battery_pct, double trust, int connectivity) {
  return battery_pct * trust * static_cast<double>(connectivity);
}

double candidate_value(const NodeProtocolState& s) {
  return candidate_value(s.battery_pct, s.trust, s.connectivity);
}

NodeId elect_cluster_head(const std::vector<ScoredCandidate>& candidates) {
  const ScoredCandidate* best = nullptr;
  for (const auto& c : candidates) {
    if (!(c.cv > 0.0)) continue;
    if (!best || c.cv > best->cv || (c.cv == best->cv && c.id < best->id))
      best = &c;
  }
  if (!best) throw RouteUnavailable("no eligible cluster-head candidate");
  return best->id;
}

}  // namespace ciisim::protocol

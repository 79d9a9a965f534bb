#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ciisim/crypto/ec.hpp"
#include "ciisim/crypto/mac.hpp"
#include "ciisim/protocol/messages.hpp"

namespace ciisim::protocol {

using crypto::GlobalKey;
using crypto::SharedSecret;

struct SealedReading {
  Bytes ciphertext;
  AuthTag tag{};
};

/// RC5-CTR under the gateway/sink secret with the packet sequence number as
/// nonce; tag = nested_hmac(gbk, secret, ciphertext).
SealedReading seal_reading(const SharedSecret& secret, const GlobalKey& gbk,
                           std::uint64_t nonce, const SensorReading& reading);

enum class VerifyStatus { kAccepted, kTagMismatch, kUnknownSender, kMalformed };

struct VerifyResult {
  VerifyStatus status = VerifyStatus::kMalformed;
  std::optional<SensorReading> reading;
};

/// Sink-side check. The tag is compared before anything is decrypted.
VerifyResult verify_and_decrypt(const std::map<NodeId, SharedSecret>& secrets,
                                const GlobalKey& gbk, const Packet& packet);

struct AggregatePayload {
  NodeId sink = kNoNode;
  SimTime window_start = 0.0;
  SimTime window_end = 0.0;
  std::vector<SensorReading> readings;

  std::size_t count() const { return readings.size(); }
  bool operator==(const AggregatePayload&) const = default;
};

/// Batches a window's readings; an empty window yields nothing.
std::optional<AggregatePayload> aggregate(NodeId sink,
                                          std::vector<SensorReading> readings,
                                          SimTime window_start,
                                          SimTime window_end);

Bytes serialize_aggregate(const AggregatePayload& a);
AggregatePayload parse_aggregate(ByteView data);

}  // namespace ciisim::protocol

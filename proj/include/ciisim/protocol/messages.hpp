#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ciisim/crypto/bytes.hpp"
#include "ciisim/crypto/mac.hpp"
#include "ciisim/engine.hpp"
#include "ciisim/topology.hpp"

namespace ciisim::protocol {

using engine::SimTime;
using crypto::AuthTag;
using crypto::Bytes;
using crypto::ByteView;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReadingKind : std::uint8_t { kScada = 1, kSynchrophasor = 2 };

struct SensorReading {
  ReadingKind kind = ReadingKind::kScada;
  std::uint64_t id = 0;  // unique per run
  NodeId sensor = kNoNode;
  BusId bus = 0;
  SimTime timestamp = 0.0;
  Bytes payload;

  bool operator==(const SensorReading&) const = default;
};

Bytes serialize_reading(const SensorReading& r);
/// Throws ProtocolError on truncated or inconsistent input.
SensorReading parse_reading(ByteView data);

struct Sensor {
  NodeId id = kNoNode;
  Role role = Role::kMuSensor;  // kMuSensor or kPmuSensor
  BusId bus = 0;
  bool alive = true;
};

/// Module 1: a sensor samples its bus. Dead sensors emit nothing. The
/// payload is a synthetic (magnitude, angle) pair that depends only on the
/// bus and the time.
std::optional<SensorReading> sense(const Sensor& sensor, SimTime now,
                                   std::uint64_t reading_id);

/// Frame k of a PMU stream started at t0: t0 + k / rate.
inline SimTime pmu_frame_time(SimTime t0, double rate_hz, std::uint64_t k) {
  return t0 + static_cast<double>(k) / rate_hz;
}

enum class PacketKind : std::uint8_t {
  kScada,
  kSynchrophasor,
  kTestMsg,
  kKeyDistribution,
  kRerouteRequest,
  kAggregateToCc,
};

const char* kind_name(PacketKind k);
bool carries_ciphertext(PacketKind k);

struct Packet {
  std::uint64_t seq = 0;
  NodeId src = kNoNode;  // originator
  NodeId dst = kNoNode;  // final destination
  std::vector<NodeId> path;  // wireless forwarders visited so far
  PacketKind kind = PacketKind::kTestMsg;
  Bytes ciphertext;
  std::optional<AuthTag> tag;
  SimTime sent_at = 0.0;
  Bytes body;  // KeyDistribution: key material (optical links only)

  // TestMsg: the candidate being probed.
  NodeId probe = kNoNode;
  // RerouteRequest: the rejected packet and the forwarders it crossed.
  std::uint64_t rejected_seq = 0;
  PacketKind rejected_kind = PacketKind::kScada;
  std::vector<NodeId> failed_path;
  // Source route (RerouteRequest) and position in it.
  std::vector<NodeId> route;
  std::size_t route_pos = 0;
  // Wireless forwarding switched from greedy to hop-count descent.
  bool void_mode = false;
  int ttl = 64;
};

inline constexpr std::size_t kHeaderBytes = 32;

/// On-air size used for energy and latency.
std::size_t packet_bits(const Packet& p);

}  // namespace ciisim::protocol

#include "ciisim/protocol/messages.hpp"

#include <cmath>

#include "wire.hpp"

namespace ciisim::protocol {

Bytes serialize_reading(const SensorReading& r) {
  Bytes out;
  out.reserve(29 + r.payload.size());
  out.push_back(static_cast<std::uint8_t>(r.kind));
  wire::put_u64(out, r.id);
  wire::put_u32(out, static_cast<std::uint32_t>(r.sensor));
  wire::put_u32(out, static_cast<std::uint32_t>(r.bus));
  wire::put_f64(out, r.timestamp);
  wire::put_u32(out, static_cast<std::uint32_t>(r.payload.size()));
  out.insert(out.end(), r.payload.begin(), r.payload.end());
  return out;
}

SensorReading parse_reading(ByteView data) {
  wire::Reader in(data);
  SensorReading r;
  const auto kind = in.u8();
  if (kind != 1 && kind != 2) throw ProtocolError("bad reading kind");
  r.kind = static_cast<ReadingKind>(kind);
  r.id = in.u64();
  r.sensor = static_cast<NodeId>(in.u32());
  r.bus = static_cast<BusId>(in.u32());
  r.timestamp = in.f64();
  r.payload = in.bytes(in.u32());
  if (!in.done()) throw ProtocolError("trailing bytes after reading");
  return r;
}

std::optional<SensorReading> sense(const Sensor& sensor, SimTime now,
                                   std::uint64_t reading_id) {
  if (!sensor.alive) return std::nullopt;
  SensorReading r;
  r.kind = sensor.role == Role::kPmuSensor ? ReadingKind::kSynchrophasor
                                           : ReadingKind::kScada;
  r.id = reading_id;
  r.sensor = sensor.id;
  r.bus = sensor.bus;
  r.timestamp = now;
  const double magnitude = 1.0 + 0.02 * std::sin(0.7 * sensor.bus + 0.1 * now);
  const double angle = std::fmod(0.05 * sensor.bus + 2.0 * M_PI * 60.0 * now, 2.0 * M_PI);
  wire::put_f64(r.payload, magnitude);
  wire::put_f64(r.payload, angle);
  return r;
}

const char* kind_name(PacketKind k) {
  switch (k) {
    case PacketKind::kScada: return "scada";
    case PacketKind::kSynchrophasor: return "synchrophasor";
    case PacketKind::kTestMsg: return "test";
    case PacketKind::kKeyDistribution: return "keydist";
    case PacketKind::kRerouteRequest: return "reroute";
    case PacketKind::kAggregateToCc: return "aggregate";
  }
  return "?";
}

bool carries_ciphertext(PacketKind k) {
  return k == PacketKind::kScada || k == PacketKind::kSynchrophasor ||
         k == PacketKind::kAggregateToCc;
}

std::size_t packet_bits(const Packet& p) {
  std::size_t bytes = kHeaderBytes + p.ciphertext.size() + p.body.size();
  if (p.tag) bytes += p.tag->size();
  bytes += 4 * p.failed_path.size();
  return 8 * bytes;
}

}  // namespace ciisim::protocol

#include "ciisim/protocol/channel.hpp"

#include <openssl/crypto.h>

#include "ciisim/crypto/rc5.hpp"
#include "wire.hpp"

namespace ciisim::protocol {

SealedReading seal_reading(const SharedSecret& secret, const GlobalKey& gbk,
                           std::uint64_t nonce, const SensorReading& reading) {
  SealedReading out;
  out.ciphertext = crypto::rc5_ctr_encrypt(secret, nonce, serialize_reading(reading));
  out.tag = crypto::nested_hmac(gbk, secret, out.ciphertext);
  return out;
}

VerifyResult verify_and_decrypt(const std::map<NodeId, SharedSecret>& secrets,
                                const GlobalKey& gbk, const Packet& packet) {
  VerifyResult res;
  const auto it = secrets.find(packet.src);
  if (it == secrets.end()) {
    res.status = VerifyStatus::kUnknownSender;
    return res;
  }
  if (!carries_ciphertext(packet.kind) || !packet.tag) {
    res.status = VerifyStatus::kMalformed;
    return res;
  }
  const AuthTag expect = crypto::nested_hmac(gbk, it->second, packet.ciphertext);
  if (CRYPTO_memcmp(expect.data(), packet.tag->data(), expect.size()) != 0) {
    res.status = VerifyStatus::kTagMismatch;
    return res;
  }
  try {
    res.reading = parse_reading(crypto::rc5_ctr_decrypt(it->second, packet.seq, packet.ciphertext));
    res.status = VerifyStatus::kAccepted;
  } catch (const ProtocolError&) {
    res.status = VerifyStatus::kMalformed;
  }
  return res;
}

std::optional<AggregatePayload> aggregate(NodeId sink,
                                          std::vector<SensorReading> readings,
                                          SimTime window_start,
                                          SimTime window_end) {
  if (readings.empty()) return std::nullopt;
  return AggregatePayload{sink, window_start, window_end, std::move(readings)};
}

Bytes serialize_aggregate(const AggregatePayload& a) {
  Bytes out;
  wire::put_u32(out, static_cast<std::uint32_t>(a.sink));
  wire::put_f64(out, a.window_start);
  wire::put_f64(out, a.window_end);
  wire::put_u32(out, static_cast<std::uint32_t>(a.readings.size()));
  for (const auto& r : a.readings) {
    const Bytes b = serialize_reading(r);
    wire::put_u32(out, static_cast<std::uint32_t>(b.size()));
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

AggregatePayload parse_aggregate(ByteView data) {
  wire::Reader in(data);
  AggregatePayload a;
  a.sink = static_cast<NodeId>(in.u32());
  a.window_start = in.f64();
  a.window_end = in.f64();
  const std::uint32_t n = in.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const Bytes b = in.bytes(in.u32());
    a.readings.push_back(parse_reading(b));
  }
  if (!in.done()) throw ProtocolError("trailing bytes after aggregate");
  return a;
}

}  // namespace ciisim::protocol

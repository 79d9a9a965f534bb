#pragma once

#include <array>
#include <cstdint>

#include "ciisim/crypto/bytes.hpp"

namespace ciisim::crypto {

inline constexpr std::size_t kDigestBytes = 32;  // SHA-256
inline constexpr std::size_t kHashBlockBytes = 64;

using Digest = std::array<std::uint8_t, kDigestBytes>;
using AuthTag = Digest;

Digest sha256(ByteView data);

/// Pre-shared key held by every infrastructure entity. Never serialized onto
/// the wire.
class GlobalKey {
 public:
  GlobalKey() = default;
  explicit GlobalKey(Bytes key) : key_(std::move(key)) {}
  ByteView bytes() const { return key_; }
  bool operator==(const GlobalKey&) const = default;

 private:
  Bytes key_;
};

/// HMAC-SHA256.
AuthTag hmac(ByteView key, ByteView message);

/// Two-level HMAC with the global key outermost:
/// hmac(gbk, hmac(session_key, message)).
AuthTag nested_hmac(const GlobalKey& gbk, ByteView session_key,
                    ByteView message);

}  // namespace ciisim::crypto

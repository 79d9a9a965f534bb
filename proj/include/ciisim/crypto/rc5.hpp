#pragma once

#include <array>
#include <cstdint>

#include "ciisim/crypto/bytes.hpp"

namespace ciisim::crypto {

/// RC5-32/12/16: 32-bit words, 12 rounds, 16-byte key.
class Rc5 {
 public:
  static constexpr std::size_t kKeyBytes = 16;
  static constexpr std::size_t kBlockBytes = 8;
  static constexpr int kRounds = 12;

  /// Throws CryptoError(kKeyLength) unless key is exactly 16 bytes.
  explicit Rc5(ByteView key);

  std::array<std::uint8_t, kBlockBytes> encrypt_block(
      std::span<const std::uint8_t, kBlockBytes> in) const;
  std::array<std::uint8_t, kBlockBytes> decrypt_block(
      std::span<const std::uint8_t, kBlockBytes> in) const;

 private:
  std::array<std::uint32_t, 2 * (kRounds + 1)> s_{};
};

/// Counter-mode keystream over the RC5 block function. Block i of the
/// keystream is E(nonce * 2^20 + i), so a nonce must stay below 2^44 and a
/// message below 2^20 blocks. Ciphertext length equals plaintext length.
Bytes rc5_ctr_encrypt(ByteView key, std::uint64_t nonce, ByteView plaintext);
Bytes rc5_ctr_decrypt(ByteView key, std::uint64_t nonce, ByteView ciphertext);

}  // namespace ciisim::crypto

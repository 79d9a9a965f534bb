#include "ciisim/crypto/rc5.hpp"

#include <bit>

namespace ciisim::crypto {

namespace {

constexpr std::uint32_t kP32 = 0xB7E15163;
constexpr std::uint32_t kQ32 = 0x9E3779B9;
constexpr int kCounterShift = 20;

std::uint32_t load_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_le(std::uint32_t v, std::uint8_t* p) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v >> 16);
  p[3] = static_cast<std::uint8_t>(v >> 24);
}

}  // namespace

Rc5::Rc5(ByteView key) {
  if (key.size() != kKeyBytes)
    throw CryptoError(CryptoErrc::kKeyLength,
                      "RC5-32/12/16 requires a 16-byte key, got " +
                          std::to_string(key.size()));
  constexpr std::size_t c = kKeyBytes / 4;
  std::array<std::uint32_t, c> l{};
  for (std::size_t i = kKeyBytes; i-- > 0;) l[i / 4] = (l[i / 4] << 8) + key[i];

  s_[0] = kP32;
  for (std::size_t i = 1; i < s_.size(); ++i) s_[i] = s_[i - 1] + kQ32;

  std::uint32_t a = 0, b = 0;
  std::size_t i = 0, j = 0;
  for (std::size_t k = 0; k < 3 * s_.size(); ++k) {
    a = s_[i] = std::rotl(s_[i] + a + b, 3);
    b = l[j] = std::rotl(l[j] + a + b, static_cast<int>((a + b) & 31));
    i = (i + 1) % s_.size();
    j = (j + 1) % c;
  }
}

std::array<std::uint8_t, Rc5::kBlockBytes> Rc5::encrypt_block(
    std::span<const std::uint8_t, kBlockBytes> in) const {
  std::uint32_t a = load_le(in.data()) + s_[0];
  std::uint32_t b = load_le(in.data() + 4) + s_[1];
  for (int r = 1; r <= kRounds; ++r) {
    a = std::rotl(a ^ b, static_cast<int>(b & 31)) + s_[2 * r];
    b = std::rotl(b ^ a, static_cast<int>(a & 31)) + s_[2 * r + 1];
  }
  std::array<std::uint8_t, kBlockBytes> out{};
  store_le(a, out.data());
  store_le(b, out.data() + 4);
  return out;
}

std::array<std::uint8_t, Rc5::kBlockBytes> Rc5::decrypt_block(
    std::span<const std::uint8_t, kBlockBytes> in) const {
  std::uint32_t a = load_le(in.data());
  std::uint32_t b = load_le(in.data() + 4);
  for (int r = kRounds; r >= 1; --r) {
    b = std::rotr(b - s_[2 * r + 1], static_cast<int>(a & 31)) ^ a;
    a = std::rotr(a - s_[2 * r], static_cast<int>(b & 31)) ^ b;
  }
  std::array<std::uint8_t, kBlockBytes> out{};
  store_le(a - s_[0], out.data());
  store_le(b - s_[1], out.data() + 4);
  return out;
}

Bytes rc5_ctr_encrypt(ByteView key, std::uint64_t nonce, ByteView plaintext) {
  const Rc5 cipher(key);
  const std::size_t blocks =
      (plaintext.size() + Rc5::kBlockBytes - 1) / Rc5::kBlockBytes;
  if (nonce >> (64 - kCounterShift))
    throw CryptoError(CryptoErrc::kOutOfRange, "CTR nonce exceeds 44 bits");
  if (blocks > (std::size_t{1} << kCounterShift))
    throw CryptoError(CryptoErrc::kOutOfRange, "CTR message too long");

  Bytes out(plaintext.begin(), plaintext.end());
  std::array<std::uint8_t, Rc5::kBlockBytes> ctr{};
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::uint64_t counter = (nonce << kCounterShift) + blk;
    store_le(static_cast<std::uint32_t>(counter), ctr.data());
    store_le(static_cast<std::uint32_t>(counter >> 32), ctr.data() + 4);
    const auto ks = cipher.encrypt_block(ctr);
    const std::size_t base = blk * Rc5::kBlockBytes;
    for (std::size_t k = 0; k < Rc5::kBlockBytes && base + k < out.size(); ++k)
      out[base + k] ^= ks[k];
  }
  return out;
}

Bytes rc5_ctr_decrypt(ByteView key, std::uint64_t nonce, ByteView ciphertext) {
  return rc5_ctr_encrypt(key, nonce, ciphertext);
}

}  // namespace ciisim::crypto

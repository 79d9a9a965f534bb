#include "ciisim/crypto/mac.hpp"

#include <openssl/evp.h>

#include <memory>

namespace ciisim::crypto {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

class Sha256Stream {
 public:
  Sha256Stream() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("EVP sha256 init failed");
  }
  void update(ByteView data) {
    if (EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1)
      throw std::runtime_error("EVP sha256 update failed");
  }
  Digest finish() {
    Digest out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1 ||
        len != kDigestBytes)
      throw std::runtime_error("EVP sha256 final failed");
    return out;
  }

 private:
  MdCtx ctx_;
};

}  // namespace

Digest sha256(ByteView data) {
  Sha256Stream h;
  h.update(data);
  return h.finish();
}

AuthTag hmac(ByteView key, ByteView message) {
  std::array<std::uint8_t, kHashBlockBytes> k0{};
  if (key.size() > kHashBlockBytes) {
    const Digest kd = sha256(key);
    std::copy(kd.begin(), kd.end(), k0.begin());
  } else {
    std::copy(key.begin(), key.end(), k0.begin());
  }

  std::array<std::uint8_t, kHashBlockBytes> ipad{}, opad{};
  for (std::size_t i = 0; i < kHashBlockBytes; ++i) {
    ipad[i] = k0[i] ^ 0x36;
    opad[i] = k0[i] ^ 0x5c;
  }

  Sha256Stream inner;
  inner.update(ipad);
  inner.update(message);
  const Digest inner_digest = inner.finish();

  Sha256Stream outer;
  outer.update(opad);
  outer.update(inner_digest);
  return outer.finish();
}

AuthTag nested_hmac(const GlobalKey& gbk, ByteView session_key,
                    ByteView message) {
  const AuthTag inner = hmac(session_key, message);
  return hmac(gbk.bytes(), inner);
}

}  // namespace ciisim::crypto

#include "ciisim/crypto/pke.hpp"

#include "ciisim/crypto/rc5.hpp"

namespace ciisim::crypto {

Bytes pk_encrypt(const CurveParams& curve, const Point& recipient_public,
                 Rng& rng, ByteView plaintext) {
  const KeyPair eph = keypair_generate(curve, rng);
  const SharedSecret key = ecdh_shared(curve, eph.private_key, recipient_public);
  const Bytes ct = rc5_ctr_encrypt(key, 0, plaintext);
  const AuthTag tag = hmac(key, ct);

  Bytes sealed = encode_point(curve, eph.public_key);
  sealed.insert(sealed.end(), ct.begin(), ct.end());
  sealed.insert(sealed.end(), tag.begin(), tag.end());
  return sealed;
}

Bytes pk_decrypt(const CurveParams& curve, const BigInt& recipient_private,
                 ByteView sealed) {
  const std::size_t point_len = 2 * curve.field_bytes();
  if (sealed.size() < point_len + kDigestBytes)
    throw CryptoError(CryptoErrc::kMalformed, "sealed blob too short");

  const Point eph = decode_point(curve, sealed.first(point_len));
  const SharedSecret key = ecdh_shared(curve, recipient_private, eph);
  const ByteView ct =
      sealed.subspan(point_len, sealed.size() - point_len - kDigestBytes);
  const ByteView tag = sealed.last(kDigestBytes);

  const AuthTag expect = hmac(key, ct);
  if (!std::equal(expect.begin(), expect.end(), tag.begin()))
    throw CryptoError(CryptoErrc::kTagMismatch, "sealed blob tag mismatch");
  return rc5_ctr_decrypt(key, 0, ct);
}

}  // namespace ciisim::crypto

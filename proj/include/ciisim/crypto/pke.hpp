#pragma once

#include "ciisim/crypto/ec.hpp"
#include "ciisim/crypto/mac.hpp"

namespace ciisim::crypto {

/// Hybrid public-key sealing for the control-center path.
///
/// Layout: ephemeral public point (x||y, fixed width) | RC5-CTR ciphertext |
/// HMAC tag over the ciphertext keyed by the ECDH-derived key. The ephemeral
/// key is fresh per message, so the CTR nonce is fixed at zero.
Bytes pk_encrypt(const CurveParams& curve, const Point& recipient_public,
                 Rng& rng, ByteView plaintext);

/// Verifies the tag before decrypting. Throws CryptoError with kTagMismatch,
/// kOffCurve or kMalformed.
Bytes pk_decrypt(const CurveParams& curve, const BigInt& recipient_private,
                 ByteView sealed);

}  // namespace ciisim::crypto

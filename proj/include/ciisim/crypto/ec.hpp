#pragma once

#include <array>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "ciisim/crypto/bytes.hpp"
#include "ciisim/rng.hpp"

namespace ciisim::crypto {

using BigInt = boost::multiprecision::cpp_int;

/// Affine point on a short-Weierstrass curve y^2 = x^3 + ax + b over F_p.
struct Point {
  BigInt x;
  BigInt y;
  bool infinity = false;

  static Point identity() { return Point{0, 0, true}; }
  bool operator==(const Point& o) const {
    if (infinity || o.infinity) return infinity == o.infinity;
    return x == o.x && y == o.y;
  }
};

struct CurveParams {
  std::string name;
  BigInt p;
  BigInt a;
  BigInt b;
  BigInt gx;
  BigInt gy;
  BigInt n;  // order of G

  Point generator() const { return Point{gx, gy, false}; }
  /// Bytes needed to hold one field element.
  std::size_t field_bytes() const;
};

/// y^2 = x^3 + 2x + 2 over F_17, G = (5, 1), n = 19. Test-only strength.
CurveParams toy_curve();
CurveParams secp256k1();
/// Builds a curve from decimal strings and validates it.
CurveParams curve_from_decimal(std::string name, const std::string& p,
                               const std::string& a, const std::string& b,
                               const std::string& gx, const std::string& gy,
                               const std::string& n);

/// Throws CryptoError(kInvalidCurve) if the discriminant vanishes, G is off
/// the curve, or n*G is not the identity.
void validate_curve(const CurveParams& curve);

bool on_curve(const CurveParams& curve, const Point& pt);
Point point_negate(const CurveParams& curve, const Point& pt);
Point point_add(const CurveParams& curve, const Point& lhs, const Point& rhs);
Point point_double(const CurveParams& curve, const Point& pt);
/// k*P via double-and-add in Jacobian coordinates. k must be non-negative.
Point scalar_multiply(const CurveParams& curve, const BigInt& k,
                      const Point& pt);

Bytes encode_point(const CurveParams& curve, const Point& pt);
/// Decodes the fixed-width x||y encoding. Does not check curve membership.
Point decode_point(const CurveParams& curve, ByteView data);

/// Big-endian, order-width encoding of a scalar.
Bytes encode_scalar(const CurveParams& curve, const BigInt& k);
BigInt decode_scalar(ByteView data);

struct KeyPair {
  BigInt private_key;
  Point public_key;
};

/// Throws CryptoError(kOutOfRange) unless 1 <= d <= n-1.
KeyPair keypair_from_private(const CurveParams& curve, const BigInt& d);
KeyPair keypair_generate(const CurveParams& curve, Rng& rng);

inline constexpr std::size_t kSharedSecretBytes = 16;
using SharedSecret = std::array<std::uint8_t, kSharedSecretBytes>;

/// SHA-256 of the big-endian x-coordinate of my_private * their_public,
/// truncated to the RC5 key length. Rejects points off the curve
/// (CryptoError kOffCurve).
SharedSecret ecdh_shared(const CurveParams& curve, const BigInt& my_private,
                         const Point& their_public);

}  // namespace ciisim::crypto

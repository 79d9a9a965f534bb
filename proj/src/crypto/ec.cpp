#include "ciisim/crypto/ec.hpp"

#include "ciisim/crypto/mac.hpp"

namespace ciisim::crypto {

namespace mp = boost::multiprecision;

namespace {

BigInt mod(const BigInt& v, const BigInt& p) {
  BigInt r = v % p;
  if (r < 0) r += p;
  return r;
}

BigInt inverse(const BigInt& v, const BigInt& p) {
  // p is prime for every supported curve
  return mp::powm(mod(v, p), p - 2, p);
}

struct Jacobian {
  BigInt x, y, z;  // z == 0 encodes the identity
};

Jacobian jacobian_double(const CurveParams& c, const Jacobian& q) {
  if (q.z == 0 || q.y == 0) return {1, 1, 0};
  const BigInt& p = c.p;
  const BigInt yy = mod(q.y * q.y, p);
  const BigInt s = mod(4 * q.x * yy, p);
  const BigInt zz = mod(q.z * q.z, p);
  const BigInt m = mod(3 * q.x * q.x + c.a * zz * zz, p);
  const BigInt x3 = mod(m * m - 2 * s, p);
  const BigInt y3 = mod(m * (s - x3) - 8 * yy * yy, p);
  const BigInt z3 = mod(2 * q.y * q.z, p);
  return {x3, y3, z3};
}

// q + (ax, ay) with the second operand affine and finite
Jacobian jacobian_add_affine(const CurveParams& c, const Jacobian& q,
                             const Point& a) {
  if (q.z == 0) return {a.x, a.y, 1};
  const BigInt& p = c.p;
  const BigInt zz = mod(q.z * q.z, p);
  const BigInt u2 = mod(a.x * zz, p);
  const BigInt s2 = mod(a.y * zz * q.z, p);
  const BigInt h = mod(u2 - q.x, p);
  const BigInt r = mod(s2 - q.y, p);
  if (h == 0) {
    if (r == 0) return jacobian_double(c, q);
    return {1, 1, 0};
  }
  const BigInt hh = mod(h * h, p);
  const BigInt hhh = mod(hh * h, p);
  const BigInt v = mod(q.x * hh, p);
  const BigInt x3 = mod(r * r - hhh - 2 * v, p);
  const BigInt y3 = mod(r * (v - x3) - q.y * hhh, p);
  const BigInt z3 = mod(q.z * h, p);
  return {x3, y3, z3};
}

Point to_affine(const CurveParams& c, const Jacobian& q) {
  if (q.z == 0) return Point::identity();
  const BigInt zi = inverse(q.z, c.p);
  const BigInt zi2 = mod(zi * zi, c.p);
  return Point{mod(q.x * zi2, c.p), mod(q.y * zi2 * zi, c.p), false};
}

void write_be(const BigInt& v, std::size_t width, std::uint8_t* out) {
  BigInt t = v;
  for (std::size_t i = width; i-- > 0;) {
    out[i] = static_cast<std::uint8_t>(static_cast<unsigned>(t & 0xff));
    t >>= 8;
  }
}

BigInt read_be(ByteView in) {
  BigInt v = 0;
  for (std::uint8_t b : in) v = (v << 8) | b;
  return v;
}

}  // namespace

std::size_t CurveParams::field_bytes() const {
  return (mp::msb(p) + 8) / 8;
}

CurveParams toy_curve() {
  return CurveParams{"toy17", 17, 2, 2, 5, 1, 19};
}

CurveParams secp256k1() {
  CurveParams c;
  c.name = "secp256k1";
  c.p = BigInt(
      "0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F");
  c.a = 0;
  c.b = 7;
  c.gx = BigInt(
      "0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798");
  c.gy = BigInt(
      "0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8");
  c.n = BigInt(
      "0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141");
  return c;
}

CurveParams curve_from_decimal(std::string name, const std::string& p,
                               const std::string& a, const std::string& b,
                               const std::string& gx, const std::string& gy,
                               const std::string& n) {
  CurveParams c;
  try {
    c = CurveParams{std::move(name), BigInt(p),  BigInt(a), BigInt(b),
                    BigInt(gx),      BigInt(gy), BigInt(n)};
  } catch (const std::exception& e) {
    throw CryptoError(CryptoErrc::kInvalidCurve,
                      std::string("bad curve integer: ") + e.what());
  }
  validate_curve(c);
  return c;
}

void validate_curve(const CurveParams& c) {
  if (c.p < 5 || c.n < 2)
    throw CryptoError(CryptoErrc::kInvalidCurve, c.name + ": degenerate p or n");
  const BigInt disc = mod(4 * c.a * c.a * c.a + 27 * c.b * c.b, c.p);
  if (disc == 0)
    throw CryptoError(CryptoErrc::kInvalidCurve, c.name + ": singular curve");
  if (!on_curve(c, c.generator()))
    throw CryptoError(CryptoErrc::kInvalidCurve,
                      c.name + ": generator not on curve");
  if (!scalar_multiply(c, c.n, c.generator()).infinity)
    throw CryptoError(CryptoErrc::kInvalidCurve,
                      c.name + ": n*G is not the identity");
}

bool on_curve(const CurveParams& c, const Point& pt) {
  if (pt.infinity) return true;
  if (pt.x < 0 || pt.x >= c.p || pt.y < 0 || pt.y >= c.p) return false;
  return mod(pt.y * pt.y - (pt.x * pt.x * pt.x + c.a * pt.x + c.b), c.p) == 0;
}

Point point_negate(const CurveParams& c, const Point& pt) {
  if (pt.infinity) return pt;
  return Point{pt.x, mod(-pt.y, c.p), false};
}

Point point_double(const CurveParams& c, const Point& pt) {
  return point_add(c, pt, pt);
}

Point point_add(const CurveParams& c, const Point& lhs, const Point& rhs) {
  if (lhs.infinity) return rhs;
  if (rhs.infinity) return lhs;
  const BigInt& p = c.p;
  BigInt slope;
  if (lhs.x == rhs.x) {
    if (mod(lhs.y + rhs.y, p) == 0) return Point::identity();
    slope = mod((3 * lhs.x * lhs.x + c.a) * inverse(2 * lhs.y, p), p);
  } else {
    slope = mod((rhs.y - lhs.y) * inverse(rhs.x - lhs.x, p), p);
  }
  const BigInt x3 = mod(slope * slope - lhs.x - rhs.x, p);
  const BigInt y3 = mod(slope * (lhs.x - x3) - lhs.y, p);
  return Point{x3, y3, false};
}

Point scalar_multiply(const CurveParams& c, const BigInt& k, const Point& pt) {
  if (k < 0)
    throw CryptoError(CryptoErrc::kOutOfRange, "negative scalar");
  if (k == 0 || pt.infinity) return Point::identity();
  Jacobian acc{1, 1, 0};
  for (std::size_t bit = mp::msb(k) + 1; bit-- > 0;) {
    acc = jacobian_double(c, acc);
    if (mp::bit_test(k, static_cast<unsigned>(bit)))
      acc = jacobian_add_affine(c, acc, pt);
  }
  return to_affine(c, acc);
}

Bytes encode_point(const CurveParams& c, const Point& pt) {
  const std::size_t w = c.field_bytes();
  Bytes out(2 * w, 0);
  if (!pt.infinity) {
    write_be(pt.x, w, out.data());
    write_be(pt.y, w, out.data() + w);
  }
  return out;
}

Point decode_point(const CurveParams& c, ByteView data) {
  const std::size_t w = c.field_bytes();
  if (data.size() != 2 * w)
    throw CryptoError(CryptoErrc::kMalformed, "point encoding has wrong size");
  return Point{read_be(data.first(w)), read_be(data.subspan(w)), false};
}

Bytes encode_scalar(const CurveParams& c, const BigInt& k) {
  const std::size_t w = (mp::msb(c.n) + 8) / 8;
  Bytes out(w, 0);
  write_be(k, w, out.data());
  return out;
}

BigInt decode_scalar(ByteView data) { return read_be(data); }

KeyPair keypair_from_private(const CurveParams& c, const BigInt& d) {
  if (d < 1 || d >= c.n)
    throw CryptoError(CryptoErrc::kOutOfRange,
                      "private key outside [1, n-1]");
  return KeyPair{d, scalar_multiply(c, d, c.generator())};
}

KeyPair keypair_generate(const CurveParams& c, Rng& rng) {
  const BigInt upper = c.n - 1;  // draw from [0, n-2], then shift by one
  const std::size_t bits = mp::msb(upper) + 1;
  for (;;) {
    BigInt d = 0;
    for (std::size_t got = 0; got < bits; got += 64) d = (d << 64) | rng();
    d >>= ((bits + 63) / 64) * 64 - bits;
    if (d < upper) return keypair_from_private(c, d + 1);
  }
}

SharedSecret ecdh_shared(const CurveParams& c, const BigInt& my_private,
                         const Point& their_public) {
  if (their_public.infinity || !on_curve(c, their_public))
    throw CryptoError(CryptoErrc::kOffCurve, "peer public key is not on the curve");
  if (my_private < 1 || my_private >= c.n)
    throw CryptoError(CryptoErrc::kOutOfRange, "private key outside [1, n-1]");
  const Point shared = scalar_multiply(c, my_private, their_public);
  if (shared.infinity)
    throw CryptoError(CryptoErrc::kOffCurve, "shared point is the identity");
  Bytes xbytes(c.field_bytes());
  write_be(shared.x, xbytes.size(), xbytes.data());
  const Digest d = sha256(xbytes);
  SharedSecret out{};
  std::copy_n(d.begin(), out.size(), out.begin());
  return out;
}

}  // namespace ciisim::crypto

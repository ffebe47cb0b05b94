// Copyright 2026 The true2f-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRUE2F_GROUP_HPP_
#define TRUE2F_GROUP_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include "true2f/bytes.hpp"
#include "true2f/rng.hpp"

// P-256 group arithmetic and ECDSA in the form the rest of the system needs:
// signing takes an explicit nonce, verification reconstructs the nonce point
// R_abs = (g^H(m) * X^c)^(1/s), and the (c, s) <-> (c, -s) malleability flip
// is a first-class operation. Field and curve arithmetic are OpenSSL's; the
// scheme logic lives here.

namespace true2f {

namespace detail {

struct BnDeleter {
  void operator()(BIGNUM* bn) const { BN_clear_free(bn); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct EcPointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_clear_free(p); }
};
using EcPointPtr = std::unique_ptr<EC_POINT, EcPointDeleter>;

inline BnPtr new_bn() {
  BIGNUM* bn = BN_new();
  if (bn == nullptr) throw InternalError("BN_new failed");
  BN_zero(bn);
  return BnPtr(bn);
}

inline BN_CTX* bn_ctx() {
  thread_local std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)> ctx(
      BN_CTX_new(), &BN_CTX_free);
  if (ctx == nullptr) throw InternalError("BN_CTX_new failed");
  return ctx.get();
}

// Per-thread count of group exponentiations (scalar multiplications). The
// instrumentation layer snapshots deltas around endpoint calls.
inline uint64_t& exp_counter() {
  thread_local uint64_t count = 0;
  return count;
}

}  // namespace detail

inline uint64_t exp_count() { return detail::exp_counter(); }

// Curve parameters: generator g, group order q, base-field prime p. The
// base-field prime satisfies p = 3 (mod 4), which the hash-to-point hint
// checks rely on.
class Group {
 public:
  static const Group& p256() {
    static const Group instance;
    return instance;
  }

  const EC_GROUP* group() const { return group_; }
  const BIGNUM* order() const { return order_; }
  const BIGNUM* field_prime() const { return p_.get(); }
  const BIGNUM* curve_b() const { return b_.get(); }

  Group(const Group&) = delete;
  Group& operator=(const Group&) = delete;

 private:
  Group() {
    group_ = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    if (group_ == nullptr) throw InternalError("P-256 group unavailable");
    order_ = EC_GROUP_get0_order(group_);
    p_ = detail::new_bn();
    a_ = detail::new_bn();
    b_ = detail::new_bn();
    if (EC_GROUP_get_curve(group_, p_.get(), a_.get(), b_.get(),
                           detail::bn_ctx()) != 1) {
      throw InternalError("EC_GROUP_get_curve failed");
    }
  }

  EC_GROUP* group_ = nullptr;
  const BIGNUM* order_ = nullptr;
  detail::BnPtr p_, a_, b_;
};

// Element of Z_q, always reduced. Fixed 32-byte big-endian serialization.
class Scalar {
 public:
  Scalar() : bn_(detail::new_bn()) {}

  Scalar(const Scalar& other) : bn_(detail::new_bn()) {
    BN_copy(bn_.get(), other.bn_.get());
  }
  Scalar(Scalar&&) noexcept = default;
  Scalar& operator=(const Scalar& other) {
    if (this != &other) BN_copy(bn_.get(), other.bn_.get());
    return *this;
  }
  Scalar& operator=(Scalar&&) noexcept = default;

  static Scalar from_u64(uint64_t v) {
    Scalar s;
    if (BN_set_word(s.bn_.get(), v) != 1) throw InternalError("BN_set_word");
    BN_nnmod(s.bn_.get(), s.bn_.get(), Group::p256().order(), detail::bn_ctx());
    return s;
  }

  // Uniform in [0, q) by rejection sampling.
  static Scalar random(RandomSource& rng) {
    Scalar s;
    const BIGNUM* q = Group::p256().order();
    for (;;) {
      Bytes32 buf = rng.bytes32();
      if (BN_bin2bn(buf.data(), buf.size(), s.bn_.get()) == nullptr) {
        throw InternalError("BN_bin2bn");
      }
      if (BN_cmp(s.bn_.get(), q) < 0) return s;
    }
  }

  // Strict decode: rejects values >= q.
  static std::optional<Scalar> from_bytes(std::span<const uint8_t> in) {
    if (in.size() != 32) return std::nullopt;
    Scalar s;
    if (BN_bin2bn(in.data(), in.size(), s.bn_.get()) == nullptr) {
      throw InternalError("BN_bin2bn");
    }
    if (BN_cmp(s.bn_.get(), Group::p256().order()) >= 0) return std::nullopt;
    return s;
  }

  // Big-endian interpretation reduced mod q.
  static Scalar from_bytes_mod(std::span<const uint8_t> in) {
    Scalar s;
    if (BN_bin2bn(in.data(), in.size(), s.bn_.get()) == nullptr) {
      throw InternalError("BN_bin2bn");
    }
    BN_nnmod(s.bn_.get(), s.bn_.get(), Group::p256().order(), detail::bn_ctx());
    return s;
  }

  Bytes32 to_bytes() const {
    Bytes32 out{};
    if (BN_bn2binpad(bn_.get(), out.data(), out.size()) < 0) {
      throw InternalError("BN_bn2binpad");
    }
    return out;
  }

  bool is_zero() const { return BN_is_zero(bn_.get()); }

  Scalar add(const Scalar& other) const {
    Scalar out;
    BN_mod_add(out.bn_.get(), bn_.get(), other.bn_.get(),
               Group::p256().order(), detail::bn_ctx());
    return out;
  }

  Scalar sub(const Scalar& other) const {
    Scalar out;
    BN_mod_sub(out.bn_.get(), bn_.get(), other.bn_.get(),
               Group::p256().order(), detail::bn_ctx());
    return out;
  }

  Scalar mul(const Scalar& other) const {
    Scalar out;
    BN_mod_mul(out.bn_.get(), bn_.get(), other.bn_.get(),
               Group::p256().order(), detail::bn_ctx());
    return out;
  }

  Scalar negate() const {
    Scalar out;
    BN_mod_sub(out.bn_.get(), BN_value_one(), BN_value_one(),
               Group::p256().order(), detail::bn_ctx());
    BN_mod_sub(out.bn_.get(), out.bn_.get(), bn_.get(), Group::p256().order(),
               detail::bn_ctx());
    return out;
  }

  // Multiplicative inverse; the zero scalar has none.
  std::optional<Scalar> invert() const {
    if (is_zero()) return std::nullopt;
    Scalar out;
    if (BN_mod_inverse(out.bn_.get(), bn_.get(), Group::p256().order(),
                       detail::bn_ctx()) == nullptr) {
      return std::nullopt;
    }
    return out;
  }

  bool operator==(const Scalar& other) const {
    return BN_cmp(bn_.get(), other.bn_.get()) == 0;
  }
  bool operator!=(const Scalar& other) const { return !(*this == other); }

  const BIGNUM* bn() const { return bn_.get(); }
  BIGNUM* mutable_bn() { return bn_.get(); }

 private:
  detail::BnPtr bn_;
};

// H: message bytes -> Z_q. SHA-256 of the message interpreted big-endian,
// reduced mod q (the convention the deployed U2F ecosystem uses).
inline Scalar hash_to_scalar(std::span<const uint8_t> m) {
  Bytes32 digest = sha256(m);
  return Scalar::from_bytes_mod(digest);
}

// Curve point or identity. Compressed SEC1 serialization (33 bytes); the
// identity encodes as a reserved all-zero tag and is never a legal public key.
class Point {
 public:
  Point() : pt_(new_point()) {}  // identity

  Point(const Point& other) : pt_(new_point()) {
    EC_POINT_copy(pt_.get(), other.pt_.get());
  }
  Point(Point&&) noexcept = default;
  Point& operator=(const Point& other) {
    if (this != &other) EC_POINT_copy(pt_.get(), other.pt_.get());
    return *this;
  }
  Point& operator=(Point&&) noexcept = default;

  static Point identity() { return Point(); }

  static Point generator() {
    Point out;
    EC_POINT_copy(out.pt_.get(),
                  EC_GROUP_get0_generator(Group::p256().group()));
    return out;
  }

  // g^x. One group exponentiation.
  static Point mul_generator(const Scalar& x) {
    Point out;
    if (EC_POINT_mul(Group::p256().group(), out.pt_.get(), x.bn(), nullptr,
                     nullptr, detail::bn_ctx()) != 1) {
      throw InternalError("EC_POINT_mul");
    }
    detail::exp_counter()++;
    return out;
  }

  // this^x. One group exponentiation.
  Point mul(const Scalar& x) const {
    Point out;
    if (EC_POINT_mul(Group::p256().group(), out.pt_.get(), nullptr, pt_.get(),
                     x.bn(), detail::bn_ctx()) != 1) {
      throw InternalError("EC_POINT_mul");
    }
    detail::exp_counter()++;
    return out;
  }

  Point add(const Point& other) const {
    Point out;
    if (EC_POINT_add(Group::p256().group(), out.pt_.get(), pt_.get(),
                     other.pt_.get(), detail::bn_ctx()) != 1) {
      throw InternalError("EC_POINT_add");
    }
    return out;
  }

  Point inverse() const {
    Point out(*this);
    if (EC_POINT_invert(Group::p256().group(), out.pt_.get(),
                        detail::bn_ctx()) != 1) {
      throw InternalError("EC_POINT_invert");
    }
    return out;
  }

  bool is_identity() const {
    return EC_POINT_is_at_infinity(Group::p256().group(), pt_.get()) == 1;
  }

  static Point from_affine(const BIGNUM* x, const BIGNUM* y) {
    Point out;
    if (EC_POINT_set_affine_coordinates(Group::p256().group(), out.pt_.get(), x,
                                        y, detail::bn_ctx()) != 1) {
      throw InternalError("point not on curve");
    }
    return out;
  }

  std::array<uint8_t, 33> encode() const {
    std::array<uint8_t, 33> out{};
    if (is_identity()) return out;  // reserved tag: 33 zero bytes
    if (EC_POINT_point2oct(Group::p256().group(), pt_.get(),
                           POINT_CONVERSION_COMPRESSED, out.data(), out.size(),
                           detail::bn_ctx()) != out.size()) {
      throw InternalError("point2oct compressed");
    }
    return out;
  }

  static std::optional<Point> decode(std::span<const uint8_t> in) {
    if (in.size() != 33) return std::nullopt;
    bool all_zero = true;
    for (uint8_t b : in) all_zero &= (b == 0);
    if (all_zero) return Point::identity();
    if (in[0] != 0x02 && in[0] != 0x03) return std::nullopt;
    Point out;
    if (EC_POINT_oct2point(Group::p256().group(), out.pt_.get(), in.data(),
                           in.size(), detail::bn_ctx()) != 1) {
      return std::nullopt;
    }
    return out;
  }

  // Uncompressed SEC1 (65 bytes), used only at the U2F wire boundary.
  std::array<uint8_t, 65> encode_uncompressed() const {
    std::array<uint8_t, 65> out{};
    if (is_identity()) throw InternalError("identity has no uncompressed form");
    if (EC_POINT_point2oct(Group::p256().group(), pt_.get(),
                           POINT_CONVERSION_UNCOMPRESSED, out.data(),
                           out.size(), detail::bn_ctx()) != out.size()) {
      throw InternalError("point2oct uncompressed");
    }
    return out;
  }

  static std::optional<Point> decode_uncompressed(
      std::span<const uint8_t> in) {
    if (in.size() != 65 || in[0] != 0x04) return std::nullopt;
    Point out;
    if (EC_POINT_oct2point(Group::p256().group(), out.pt_.get(), in.data(),
                           in.size(), detail::bn_ctx()) != 1) {
      return std::nullopt;
    }
    return out;
  }

  // Conversion function f: x-coordinate mod q. f(P) = f(1/P).
  Scalar f() const {
    if (is_identity()) throw InternalError("f(identity) undefined");
    detail::BnPtr x = detail::new_bn();
    if (EC_POINT_get_affine_coordinates(Group::p256().group(), pt_.get(),
                                        x.get(), nullptr,
                                        detail::bn_ctx()) != 1) {
      throw InternalError("get_affine_coordinates");
    }
    Scalar out;
    BN_nnmod(out.mutable_bn(), x.get(), Group::p256().order(),
             detail::bn_ctx());
    return out;
  }

  bool operator==(const Point& other) const {
    return EC_POINT_cmp(Group::p256().group(), pt_.get(), other.pt_.get(),
                        detail::bn_ctx()) == 0;
  }
  bool operator!=(const Point& other) const { return !(*this == other); }

  const EC_POINT* pt() const { return pt_.get(); }

 private:
  static detail::EcPointPtr new_point() {
    EC_POINT* p = EC_POINT_new(Group::p256().group());
    if (p == nullptr) throw InternalError("EC_POINT_new");
    return detail::EcPointPtr(p);
  }

  detail::EcPointPtr pt_;
};

struct EcdsaSignature {
  Scalar c;
  Scalar s;

  std::array<uint8_t, 64> to_bytes() const {
    std::array<uint8_t, 64> out{};
    Bytes32 cb = c.to_bytes(), sb = s.to_bytes();
    std::memcpy(out.data(), cb.data(), 32);
    std::memcpy(out.data() + 32, sb.data(), 32);
    return out;
  }

  static std::optional<EcdsaSignature> from_bytes(
      std::span<const uint8_t> in) {
    if (in.size() != 64) return std::nullopt;
    auto c = Scalar::from_bytes(in.subspan(0, 32));
    auto s = Scalar::from_bytes(in.subspan(32, 32));
    if (!c || !s) return std::nullopt;
    return EcdsaSignature{*c, *s};
  }

  bool operator==(const EcdsaSignature& other) const {
    return c == other.c && s == other.s;
  }
  bool operator!=(const EcdsaSignature& other) const {
    return !(*this == other);
  }
};

// (sk, pk) = (x, g^x) with x uniform in Z_q.
inline std::pair<Scalar, Point> ecdsa_keygen(RandomSource& rng) {
  Scalar x = Scalar::random(rng);
  Point pk = Point::mul_generator(x);
  return {std::move(x), std::move(pk)};
}

// Deterministic ECDSA signing with a caller-supplied nonce:
//   c = f(g^r), s = (H(m) + c*x) / r.
// Returns nullopt when c = 0 or s = 0 (the scheme rejects both); the caller
// decides what a rejection means — the firewalled protocol restarts from key
// generation rather than resampling silently.
inline std::optional<EcdsaSignature> ecdsa_sign(const Scalar& sk,
                                                std::span<const uint8_t> m,
                                                const Scalar& nonce) {
  if (nonce.is_zero() || sk.is_zero()) {
    throw InternalError("ecdsa_sign requires nonzero sk and nonce");
  }
  Point r_point = Point::mul_generator(nonce);
  Scalar c = r_point.f();
  Scalar h = hash_to_scalar(m);
  auto r_inv = nonce.invert();
  if (!r_inv) return std::nullopt;
  Scalar s = h.add(c.mul(sk)).mul(*r_inv);
  if (c.is_zero() || s.is_zero()) return std::nullopt;
  return EcdsaSignature{std::move(c), std::move(s)};
}

namespace detail {

// R_abs = (g^(H(m)/s) * X^(c/s)); shared by verification and nonce recovery.
inline std::optional<Point> nonce_point(const Point& pk,
                                        std::span<const uint8_t> m,
                                        const EcdsaSignature& sig) {
  if (sig.c.is_zero() || sig.s.is_zero()) return std::nullopt;
  auto s_inv = sig.s.invert();
  if (!s_inv) return std::nullopt;
  Scalar u1 = hash_to_scalar(m).mul(*s_inv);
  Scalar u2 = sig.c.mul(*s_inv);
  Point r_abs = Point::mul_generator(u1).add(pk.mul(u2));
  return r_abs;
}

}  // namespace detail

// Accepts iff c != 0, s != 0, R_abs != identity and f(R_abs) = c. Total on
// malformed input.
inline bool ecdsa_verify(const Point& pk, std::span<const uint8_t> m,
                         const EcdsaSignature& sig) {
  if (pk.is_identity()) return false;
  auto r_abs = detail::nonce_point(pk, m, sig);
  if (!r_abs || r_abs->is_identity()) return false;
  return r_abs->f() == sig.c;
}

// Recovers R_abs in {g^r, g^-r} from a valid signature, enabling the
// firewall's nonce audit. Fails on non-verifying signatures.
inline std::optional<Point> recover_nonce_point(const Point& pk,
                                                std::span<const uint8_t> m,
                                                const EcdsaSignature& sig) {
  if (pk.is_identity()) return std::nullopt;
  auto r_abs = detail::nonce_point(pk, m, sig);
  if (!r_abs || r_abs->is_identity()) return std::nullopt;
  if (r_abs->f() != sig.c) return std::nullopt;
  return r_abs;
}

// The malleability flip (c, s) -> (c, -s). An involution; preserves validity.
inline EcdsaSignature flip(const EcdsaSignature& sig) {
  return EcdsaSignature{sig.c, sig.s.negate()};
}

}  // namespace true2f

#endif  // TRUE2F_GROUP_HPP_

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

#ifndef TRUE2F_VRF_HPP_
#define TRUE2F_VRF_HPP_

#include <optional>
#include <span>
#include <vector>

#include "true2f/group.hpp"

// EC-VRF over P-256 mapping identity strings into Z_q*, with try-and-increment
// hashing to the curve and an outsourcing protocol that lets an untrusted
// helper supply the square roots so the evaluator only squares.
//
// Hash-to-point: candidate x-coordinates are x_i = SHA-256(be32(i) || id)
// reduced into the base field, i starting at 0. Let g(x) = x^3 - 3x + b be the
// curve polynomial. The first candidate with g(x_i) a quadratic residue wins;
// the y-coordinate is the even square root.
//
// Proof layout (fixed offsets, stable across versions — callers cache these
// bytes): Gamma (33, compressed point) || e (32, challenge) || t (32,
// response), 97 bytes total. The challenge is SHA-256 over the transcript
// tag || pk || H_G(id) || Gamma || g^k || H_G(id)^k, reduced mod q.
// Output: y = SHA-256(Gamma serialized) mod q, with 0 remapped to 1.

namespace true2f {

inline constexpr size_t kVrfProofSize = 97;

struct SqrtHints {
  // roots[i] squares to -g(x_i) for i < l-1 and to g(x_l) for the last entry
  // (indices 0-based; l = roots.size() is the 1-based winning candidate).
  std::vector<Bytes32> roots;

  size_t candidate_index() const { return roots.size(); }

  Bytes serialize() const {
    Bytes out;
    append_u8(out, static_cast<uint8_t>(roots.size()));
    for (const auto& r : roots) append(out, r);
    return out;
  }

  static std::optional<SqrtHints> deserialize(std::span<const uint8_t> in) {
    if (in.empty()) return std::nullopt;
    size_t n = in[0];
    if (n == 0 || in.size() != 1 + 32 * n) return std::nullopt;
    SqrtHints hints;
    hints.roots.resize(n);
    for (size_t i = 0; i < n; i++) {
      std::memcpy(hints.roots[i].data(), in.data() + 1 + 32 * i, 32);
    }
    return hints;
  }
};

namespace detail {

inline Bytes32 fe_bytes(const BIGNUM* x) {
  Bytes32 out{};
  if (BN_bn2binpad(x, out.data(), out.size()) < 0) {
    throw InternalError("BN_bn2binpad");
  }
  return out;
}

// x_i = SHA-256(be32(i) || id) mod p.
inline BnPtr candidate_x(uint32_t i, std::span<const uint8_t> id) {
  Bytes input;
  append_u32be(input, i);
  append(input, id);
  Bytes32 digest = sha256(input);
  BnPtr x = new_bn();
  BN_bin2bn(digest.data(), digest.size(), x.get());
  BN_nnmod(x.get(), x.get(), Group::p256().field_prime(), bn_ctx());
  return x;
}

// g(x) = x^3 - 3x + b mod p.
inline BnPtr curve_rhs(const BIGNUM* x) {
  const BIGNUM* p = Group::p256().field_prime();
  BN_CTX* ctx = bn_ctx();
  BnPtr t = new_bn();
  BnPtr out = new_bn();
  BN_mod_sqr(t.get(), x, p, ctx);              // x^2
  BN_mod_sub(t.get(), t.get(), BN_value_one(), p, ctx);
  BN_mod_sub(t.get(), t.get(), BN_value_one(), p, ctx);
  BN_mod_sub(t.get(), t.get(), BN_value_one(), p, ctx);  // x^2 - 3
  BN_mod_mul(out.get(), t.get(), x, p, ctx);             // x^3 - 3x
  BN_mod_add(out.get(), out.get(), Group::p256().curve_b(), p, ctx);
  return out;
}

inline bool is_quadratic_residue(const BIGNUM* z) {
  // z^((p-1)/2) == 1. The curve polynomial never vanishes on F_p (the group
  // order is odd, so there is no two-torsion), so z != 0 here.
  const BIGNUM* p = Group::p256().field_prime();
  BN_CTX* ctx = bn_ctx();
  BnPtr exp = new_bn();
  BN_sub(exp.get(), p, BN_value_one());
  BN_rshift1(exp.get(), exp.get());
  BnPtr r = new_bn();
  BN_mod_exp(r.get(), z, exp.get(), p, ctx);
  return BN_is_one(r.get());
}

// Square root via z^((p+1)/4); valid because p = 3 (mod 4).
inline BnPtr sqrt_mod_p(const BIGNUM* z) {
  const BIGNUM* p = Group::p256().field_prime();
  BN_CTX* ctx = bn_ctx();
  BnPtr exp = new_bn();
  BN_add(exp.get(), p, BN_value_one());
  BN_rshift(exp.get(), exp.get(), 2);
  BnPtr r = new_bn();
  BN_mod_exp(r.get(), z, exp.get(), p, ctx);
  return r;
}

inline BnPtr negate_mod_p(const BIGNUM* z) {
  BnPtr out = new_bn();
  BN_mod_sub(out.get(), Group::p256().field_prime(), z,
             Group::p256().field_prime(), bn_ctx());
  BN_nnmod(out.get(), out.get(), Group::p256().field_prime(), bn_ctx());
  return out;
}

inline Point point_from_x_and_root(const BIGNUM* x, const BIGNUM* root) {
  BnPtr y = new_bn();
  BN_copy(y.get(), root);
  if (BN_is_bit_set(y.get(), 0)) {
    BnPtr neg = negate_mod_p(y.get());
    y = std::move(neg);
  }
  return Point::from_affine(x, y.get());
}

}  // namespace detail

inline constexpr uint32_t kMaxHashToPointCandidates = 256;

// Direct try-and-increment. Success within 256 candidates is overwhelming;
// running out indicates a broken hash and is fatal.
inline Point hash_to_point(std::span<const uint8_t> id) {
  for (uint32_t i = 0; i < kMaxHashToPointCandidates; i++) {
    detail::BnPtr x = detail::candidate_x(i, id);
    detail::BnPtr rhs = detail::curve_rhs(x.get());
    if (!detail::is_quadratic_residue(rhs.get())) continue;
    detail::BnPtr root = detail::sqrt_mod_p(rhs.get());
    return detail::point_from_x_and_root(x.get(), root.get());
  }
  throw InternalError("hash_to_point exceeded candidate budget");
}

inline SqrtHints make_sqrt_hints(std::span<const uint8_t> id) {
  SqrtHints hints;
  for (uint32_t i = 0; i < kMaxHashToPointCandidates; i++) {
    detail::BnPtr x = detail::candidate_x(i, id);
    detail::BnPtr rhs = detail::curve_rhs(x.get());
    if (detail::is_quadratic_residue(rhs.get())) {
      detail::BnPtr root = detail::sqrt_mod_p(rhs.get());
      hints.roots.push_back(detail::fe_bytes(root.get()));
      return hints;
    }
    detail::BnPtr neg = detail::negate_mod_p(rhs.get());
    detail::BnPtr root = detail::sqrt_mod_p(neg.get());
    hints.roots.push_back(detail::fe_bytes(root.get()));
  }
  throw InternalError("make_sqrt_hints exceeded candidate budget");
}

enum class HintError {
  kEmpty,
  kTooMany,
  kBadRoot,  // some r_i^2 is not the required -g(x_i) / g(x_l)
};

// Hint-assisted hashing: identical output to hash_to_point, but every
// candidate is settled with one field squaring. Because -1 is a non-residue
// mod p, r_i^2 = -g(x_i) proves g(x_i) has no root, and r_l^2 = g(x_l)
// exhibits the winning root directly.
inline std::optional<Point> hash_to_point_with_hints(
    std::span<const uint8_t> id, const SqrtHints& hints,
    HintError* error = nullptr) {
  auto fail = [&](HintError e) -> std::optional<Point> {
    if (error != nullptr) *error = e;
    return std::nullopt;
  };
  size_t l = hints.roots.size();
  if (l == 0) return fail(HintError::kEmpty);
  if (l > kMaxHashToPointCandidates) return fail(HintError::kTooMany);

  const BIGNUM* p = Group::p256().field_prime();
  BN_CTX* ctx = detail::bn_ctx();
  for (size_t i = 0; i < l; i++) {
    detail::BnPtr x = detail::candidate_x(static_cast<uint32_t>(i), id);
    detail::BnPtr rhs = detail::curve_rhs(x.get());
    detail::BnPtr r = detail::new_bn();
    BN_bin2bn(hints.roots[i].data(), hints.roots[i].size(), r.get());
    if (BN_cmp(r.get(), p) >= 0) return fail(HintError::kBadRoot);
    detail::BnPtr square = detail::new_bn();
    BN_mod_sqr(square.get(), r.get(), p, ctx);
    if (i + 1 < l) {
      detail::BnPtr neg = detail::negate_mod_p(rhs.get());
      if (BN_cmp(square.get(), neg.get()) != 0) {
        return fail(HintError::kBadRoot);
      }
    } else {
      if (BN_cmp(square.get(), rhs.get()) != 0) {
        return fail(HintError::kBadRoot);
      }
      return detail::point_from_x_and_root(x.get(), r.get());
    }
  }
  return fail(HintError::kBadRoot);
}

struct VrfKeypair {
  Scalar sk;
  Point pk;
};

inline VrfKeypair vrf_keygen(RandomSource& rng) {
  auto [sk, pk] = ecdsa_keygen(rng);
  return VrfKeypair{std::move(sk), std::move(pk)};
}

struct VrfOutput {
  Scalar y;     // element of Z_q*
  Bytes proof;  // Gamma || e || t, kVrfProofSize bytes
};

namespace detail {

inline Scalar vrf_output_from_gamma(const Point& gamma) {
  Scalar y = Scalar::from_bytes_mod(sha256(gamma.encode()));
  if (y.is_zero()) y = Scalar::from_u64(1);
  return y;
}

inline Scalar dleq_challenge(const Point& pk, const Point& h,
                             const Point& gamma, const Point& u,
                             const Point& v) {
  Bytes transcript;
  append(transcript, as_span(std::string("true2f-vrf-dleq")));
  append(transcript, pk.encode());
  append(transcript, h.encode());
  append(transcript, gamma.encode());
  append(transcript, u.encode());
  append(transcript, v.encode());
  return Scalar::from_bytes_mod(sha256(transcript));
}

}  // namespace detail

// Deterministic evaluation: Gamma = H_G(id)^sk with a proof that
// log_g(pk) = log_{H_G(id)}(Gamma). The precomputed curve point may be passed
// in when the caller already holds it (e.g. from hint-assisted hashing).
inline VrfOutput vrf_eval(const Scalar& sk, std::span<const uint8_t> id,
                          const Point* precomputed_h = nullptr) {
  if (sk.is_zero()) throw InternalError("vrf_eval with zero key");
  Point h = precomputed_h != nullptr ? *precomputed_h : hash_to_point(id);
  Point pk = Point::mul_generator(sk);
  Point gamma = h.mul(sk);

  // Deterministic proof nonce bound to (sk, id).
  Bytes nonce_input;
  append(nonce_input, as_span(std::string("true2f-vrf-nonce")));
  append(nonce_input, sk.to_bytes());
  append(nonce_input, id);
  Scalar k = Scalar::from_bytes_mod(sha256(nonce_input));
  if (k.is_zero()) k = Scalar::from_u64(1);

  Point u = Point::mul_generator(k);
  Point v = h.mul(k);
  Scalar e = detail::dleq_challenge(pk, h, gamma, u, v);
  Scalar t = k.sub(e.mul(sk));

  VrfOutput out;
  out.y = detail::vrf_output_from_gamma(gamma);
  append(out.proof, gamma.encode());
  append(out.proof, e.to_bytes());
  append(out.proof, t.to_bytes());
  return out;
}

// Accepts exactly the honest (y, proof) for (pk, id). Total on malformed
// input.
inline bool vrf_verify(const Point& pk, std::span<const uint8_t> id,
                       const Scalar& y, std::span<const uint8_t> proof) {
  if (proof.size() != kVrfProofSize) return false;
  if (pk.is_identity()) return false;
  auto gamma = Point::decode(proof.subspan(0, 33));
  auto e = Scalar::from_bytes(proof.subspan(33, 32));
  auto t = Scalar::from_bytes(proof.subspan(65, 32));
  if (!gamma || gamma->is_identity() || !e || !t) return false;

  Point h = hash_to_point(id);
  Point u = Point::mul_generator(*t).add(pk.mul(*e));
  Point v = h.mul(*t).add(gamma->mul(*e));
  if (detail::dleq_challenge(pk, h, *gamma, u, v) != *e) return false;
  return y == detail::vrf_output_from_gamma(*gamma);
}

}  // namespace true2f

#endif  // TRUE2F_VRF_HPP_

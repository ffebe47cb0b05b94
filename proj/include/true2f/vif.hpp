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

#ifndef TRUE2F_VIF_HPP_
#define TRUE2F_VIF_HPP_

#include <optional>
#include <span>
#include <utility>

#include "true2f/group.hpp"
#include "true2f/vrf.hpp"

// Verifiable identity family: a master keypair commits to a function from
// identity strings to ECDSA keypairs. Eval derives (x*y, g^(x*y)) where y is
// the VRF output for the identity; the proof (y, proof_vrf) lets the holder of
// the master public key check that a claimed per-identity key is the unique
// one.
//
// Proof serialization: y (32 bytes) || VRF proof (kVrfProofSize bytes).
//
// The two VRF-less variants (per-identity key x*id or x+id) are kept here as
// negative-test oracles together with the signature forgeries that break
// them; nothing outside the test suites should use them.

namespace true2f {

inline constexpr size_t kVifProofSize = 32 + kVrfProofSize;

struct VifMasterKeypair {
  Scalar x;        // master ECDSA secret
  Scalar sk_vrf;   // VRF secret
  Point big_x;     // X = g^x
  Point pk_vrf;    // g^sk_vrf
};

struct VifMasterPublicKey {
  Point big_x;
  Point pk_vrf;
};

inline VifMasterPublicKey public_part(const VifMasterKeypair& msk) {
  return VifMasterPublicKey{msk.big_x, msk.pk_vrf};
}

inline VifMasterKeypair vif_keygen(RandomSource& rng) {
  auto [x, big_x] = ecdsa_keygen(rng);
  VrfKeypair vrf = vrf_keygen(rng);
  return VifMasterKeypair{std::move(x), std::move(vrf.sk),
                          std::move(big_x), std::move(vrf.pk)};
}

struct VifIdentityKey {
  Scalar sk;    // x * y
  Point pk;     // g^(x*y)
  Scalar y;     // VRF output, element of Z_q*
  Bytes proof;  // y || proof_vrf
};

// Deterministic derivation of the per-identity keypair with proof. The VRF
// curve point may be supplied by the caller (hint-assisted hashing).
inline VifIdentityKey vif_eval(const VifMasterKeypair& msk,
                               std::span<const uint8_t> id,
                               const Point* precomputed_h = nullptr) {
  VrfOutput vrf = vrf_eval(msk.sk_vrf, id, precomputed_h);
  Scalar sk = msk.x.mul(vrf.y);
  Point pk = Point::mul_generator(sk);
  Bytes proof;
  append(proof, vrf.y.to_bytes());
  append(proof, vrf.proof);
  return VifIdentityKey{std::move(sk), std::move(pk), vrf.y, std::move(proof)};
}

// Checks (a) pk_id = X^y and (b) the VRF proof for (id, y). Total on
// malformed input.
inline bool vif_verify(const VifMasterPublicKey& mpk,
                       std::span<const uint8_t> id, const Point& pk_id,
                       std::span<const uint8_t> proof) {
  if (proof.size() != kVifProofSize) return false;
  auto y = Scalar::from_bytes(proof.subspan(0, 32));
  if (!y || y->is_zero()) return false;
  if (pk_id.is_identity()) return false;
  if (mpk.big_x.mul(*y) != pk_id) return false;
  return vrf_verify(mpk.pk_vrf, id, *y, proof.subspan(32));
}

// Secret-key derivation from a cached VRF output: one scalar multiplication
// in Z_q, no group exponentiation. Authenticity of y is the caller's problem
// (the token gates it behind its MAC).
inline std::optional<Scalar> vif_secret_from_cached(const Scalar& x,
                                                    const Scalar& y) {
  if (y.is_zero()) return std::nullopt;
  return x.mul(y);
}

// Public-key derivation from a cached VRF output: X^y.
inline std::optional<Point> vif_public_from_cached(const Point& big_x,
                                                   const Scalar& y) {
  if (y.is_zero()) return std::nullopt;
  return big_x.mul(y);
}

// --- Insecure VRF-less variants and their forgeries (negative oracles) ---

enum class InsecureVariant { kMultiplicative, kAdditive };

inline std::optional<Scalar> insecure_derived_key(InsecureVariant variant,
                                                  const Scalar& x,
                                                  const Scalar& id) {
  if (id.is_zero()) return std::nullopt;
  Scalar derived = variant == InsecureVariant::kMultiplicative ? x.mul(id)
                                                               : x.add(id);
  if (derived.is_zero()) return std::nullopt;
  return derived;
}

// Plain ECDSA under the derived key x*id or x+id.
inline std::optional<EcdsaSignature> insecure_vif_sign(InsecureVariant variant,
                                                       const Scalar& x,
                                                       const Scalar& id,
                                                       std::span<const uint8_t> m,
                                                       const Scalar& nonce) {
  auto derived = insecure_derived_key(variant, x, id);
  if (!derived) return std::nullopt;
  return ecdsa_sign(*derived, m, nonce);
}

struct Forgery {
  Scalar id;
  EcdsaSignature sig;
};

// Multiplicative break: from a signature (c0, s0) on m0 under key x*id0,
// id1 = id0 * H(m1)/H(m0) and s1 = s0 * H(m1)/H(m0) give a valid signature
// (c0, s1) on m1 under key x*id1 — no knowledge of x required.
inline std::optional<Forgery> forge_multiplicative(const Scalar& id0,
                                                   std::span<const uint8_t> m0,
                                                   const EcdsaSignature& sig0,
                                                   std::span<const uint8_t> m1) {
  Scalar h0 = hash_to_scalar(m0);
  Scalar h1 = hash_to_scalar(m1);
  auto h0_inv = h0.invert();
  if (!h0_inv) return std::nullopt;
  Scalar ratio = h1.mul(*h0_inv);
  return Forgery{id0.mul(ratio), EcdsaSignature{sig0.c, sig0.s.mul(ratio)}};
}

// Additive break: id1 = id0 + (H(m0) - H(m1))/c0 re-targets the unchanged
// signature (c0, s0) to message m1 under key x+id1.
inline std::optional<Forgery> forge_additive(const Scalar& id0,
                                             std::span<const uint8_t> m0,
                                             const EcdsaSignature& sig0,
                                             std::span<const uint8_t> m1) {
  auto c0_inv = sig0.c.invert();
  if (!c0_inv) return std::nullopt;
  Scalar h0 = hash_to_scalar(m0);
  Scalar h1 = hash_to_scalar(m1);
  Scalar shift = h0.sub(h1).mul(*c0_inv);
  return Forgery{id0.add(shift), sig0};
}

}  // namespace true2f

#endif  // TRUE2F_VIF_HPP_

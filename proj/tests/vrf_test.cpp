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

#include <catch2/catch_amalgamated.hpp>

#include "true2f/vrf.hpp"

using namespace true2f;

namespace {

// Independent candidate walk used as the oracle for the hint protocol: counts
// candidates and rebuilds the point with its own BIGNUM arithmetic.
struct DirectWalk {
  size_t winning_index;  // 1-based
  Point point;
};

DirectWalk direct_try_and_increment(std::span<const uint8_t> id) {
  const BIGNUM* p = Group::p256().field_prime();
  BN_CTX* ctx = detail::bn_ctx();
  for (uint32_t i = 0;; i++) {
    REQUIRE(i < 256);
    Bytes input;
    append_u32be(input, i);
    append(input, id);
    Bytes32 digest = sha256(input);
    detail::BnPtr x = detail::new_bn();
    BN_bin2bn(digest.data(), digest.size(), x.get());
    BN_nnmod(x.get(), x.get(), p, ctx);

    // rhs = x^3 - 3x + b
    detail::BnPtr rhs = detail::new_bn();
    detail::BnPtr three = detail::new_bn();
    BN_set_word(three.get(), 3);
    detail::BnPtr cube = detail::new_bn();
    BN_mod_sqr(cube.get(), x.get(), p, ctx);
    BN_mod_mul(cube.get(), cube.get(), x.get(), p, ctx);
    detail::BnPtr linear = detail::new_bn();
    BN_mod_mul(linear.get(), three.get(), x.get(), p, ctx);
    BN_mod_sub(rhs.get(), cube.get(), linear.get(), p, ctx);
    BN_mod_add(rhs.get(), rhs.get(), Group::p256().curve_b(), p, ctx);

    // Euler criterion
    detail::BnPtr exp = detail::new_bn();
    BN_sub(exp.get(), p, BN_value_one());
    BN_rshift1(exp.get(), exp.get());
    detail::BnPtr legendre = detail::new_bn();
    BN_mod_exp(legendre.get(), rhs.get(), exp.get(), p, ctx);
    if (!BN_is_one(legendre.get())) continue;

    detail::BnPtr sqexp = detail::new_bn();
    BN_add(sqexp.get(), p, BN_value_one());
    BN_rshift(sqexp.get(), sqexp.get(), 2);
    detail::BnPtr y = detail::new_bn();
    BN_mod_exp(y.get(), rhs.get(), sqexp.get(), p, ctx);
    if (BN_is_bit_set(y.get(), 0)) {
      BN_mod_sub(y.get(), p, y.get(), p, ctx);
      BN_nnmod(y.get(), y.get(), p, ctx);
    }
    return DirectWalk{i + 1, Point::from_affine(x.get(), y.get())};
  }
}

}  // namespace

TEST_CASE("hash_to_point lands on the curve and is deterministic") {
  SeededRandom rng(20);
  for (int i = 0; i < 1000; i++) {
    Bytes id = rng.bytes(32);
    Point p = hash_to_point(id);  // from_affine rejects off-curve input
    CHECK_FALSE(p.is_identity());
  }
  Bytes id = rng.bytes(32);
  CHECK(hash_to_point(id) == hash_to_point(id));
}

TEST_CASE("negating a non-residue yields a residue") {
  // p = 3 (mod 4) makes -1 a non-residue, so exactly one of z, -z has a root.
  const BIGNUM* p = Group::p256().field_prime();
  REQUIRE((BN_mod_word(p, 4) == 3));
  SeededRandom rng(21);
  int seen_nonresidues = 0;
  for (int i = 0; i < 200; i++) {
    Bytes32 raw = rng.bytes32();
    detail::BnPtr z = detail::new_bn();
    BN_bin2bn(raw.data(), raw.size(), z.get());
    BN_nnmod(z.get(), z.get(), p, detail::bn_ctx());
    if (BN_is_zero(z.get())) continue;
    if (!detail::is_quadratic_residue(z.get())) {
      seen_nonresidues++;
      detail::BnPtr neg = detail::negate_mod_p(z.get());
      CHECK(detail::is_quadratic_residue(neg.get()));
    }
  }
  CHECK(seen_nonresidues > 50);
}

TEST_CASE("hint-assisted hashing equals the direct computation") {
  SeededRandom rng(22);
  for (int i = 0; i < 100; i++) {
    Bytes id = rng.bytes(32);
    SqrtHints hints = make_sqrt_hints(id);
    auto assisted = hash_to_point_with_hints(id, hints);
    REQUIRE(assisted.has_value());
    DirectWalk direct = direct_try_and_increment(id);
    CHECK(*assisted == direct.point);
    CHECK(hints.candidate_index() == direct.winning_index);
  }
}

TEST_CASE("tampered hints are rejected") {
  SeededRandom rng(23);
  Bytes id = rng.bytes(32);
  SqrtHints hints = make_sqrt_hints(id);

  SqrtHints tampered = hints;
  tampered.roots[0][31] ^= 0x01;  // r_1 + delta
  HintError err;
  CHECK_FALSE(hash_to_point_with_hints(id, tampered, &err).has_value());
  CHECK(err == HintError::kBadRoot);

  SqrtHints empty;
  CHECK_FALSE(hash_to_point_with_hints(id, empty, &err).has_value());
  CHECK(err == HintError::kEmpty);

  // A truncated hint list fails the final-root check.
  if (hints.roots.size() > 1) {
    SqrtHints truncated = hints;
    truncated.roots.pop_back();
    CHECK_FALSE(hash_to_point_with_hints(id, truncated).has_value());
  }
}

TEST_CASE("first-candidate residue ids produce a single hint") {
  SeededRandom rng(24);
  bool found = false;
  for (int i = 0; i < 64 && !found; i++) {
    Bytes id = rng.bytes(32);
    DirectWalk direct = direct_try_and_increment(id);
    if (direct.winning_index != 1) continue;
    found = true;
    SqrtHints hints = make_sqrt_hints(id);
    CHECK(hints.roots.size() == 1);
    auto assisted = hash_to_point_with_hints(id, hints);
    REQUIRE(assisted.has_value());
    CHECK(*assisted == direct.point);
  }
  CHECK(found);  // probability 1/2 per id; 64 misses would mean a bug
}

TEST_CASE("mean hint count is near two") {
  SeededRandom rng(25);
  size_t total = 0;
  const int n = 1000;
  for (int i = 0; i < n; i++) {
    Bytes id = rng.bytes(32);
    total += make_sqrt_hints(id).candidate_index();
  }
  double mean = static_cast<double>(total) / n;
  CHECK(mean > 1.7);
  CHECK(mean < 2.3);
}

TEST_CASE("hint serialization round-trips") {
  SeededRandom rng(26);
  Bytes id = rng.bytes(32);
  SqrtHints hints = make_sqrt_hints(id);
  auto back = SqrtHints::deserialize(hints.serialize());
  REQUIRE(back.has_value());
  CHECK(back->roots == hints.roots);
  CHECK_FALSE(SqrtHints::deserialize(Bytes{}).has_value());
  CHECK_FALSE(SqrtHints::deserialize(Bytes{3, 0xaa}).has_value());
}

TEST_CASE("vrf completeness and determinism") {
  SeededRandom rng(27);
  VrfKeypair kp = vrf_keygen(rng);
  for (int i = 0; i < 20; i++) {
    Bytes id = rng.bytes(32);
    VrfOutput out = vrf_eval(kp.sk, id);
    CHECK(out.proof.size() == kVrfProofSize);
    CHECK(vrf_verify(kp.pk, id, out.y, out.proof));
    CHECK_FALSE(out.y.is_zero());

    VrfOutput again = vrf_eval(kp.sk, id);
    CHECK(again.y == out.y);
    CHECK(again.proof == out.proof);
  }
}

TEST_CASE("vrf eval accepts a precomputed curve point") {
  SeededRandom rng(28);
  VrfKeypair kp = vrf_keygen(rng);
  Bytes id = rng.bytes(32);
  Point h = hash_to_point(id);
  VrfOutput direct = vrf_eval(kp.sk, id);
  VrfOutput precomp = vrf_eval(kp.sk, id, &h);
  CHECK(direct.y == precomp.y);
  CHECK(direct.proof == precomp.proof);
}

TEST_CASE("vrf soundness probe: byte mutations never verify") {
  SeededRandom rng(29);
  VrfKeypair kp = vrf_keygen(rng);
  Bytes id = rng.bytes(32);
  VrfOutput out = vrf_eval(kp.sk, id);
  REQUIRE(vrf_verify(kp.pk, id, out.y, out.proof));

  SeededRandom mut(290);
  for (int trial = 0; trial < 200; trial++) {
    // Mutate one byte of the (y || proof) encoding.
    Bytes blob;
    append(blob, out.y.to_bytes());
    append(blob, out.proof);
    size_t pos = mut.u64() % blob.size();
    uint8_t delta = static_cast<uint8_t>(1 + (mut.u64() % 255));
    blob[pos] ^= delta;

    auto y = Scalar::from_bytes(std::span(blob).subspan(0, 32));
    if (!y) continue;  // mutation produced an out-of-range scalar: rejected
    Bytes proof(blob.begin() + 32, blob.end());
    CHECK_FALSE(vrf_verify(kp.pk, id, *y, proof));
  }
}

TEST_CASE("vrf uniqueness: substituted outputs are rejected") {
  SeededRandom rng(30);
  VrfKeypair kp = vrf_keygen(rng);
  Bytes id = rng.bytes(32);
  VrfOutput out = vrf_eval(kp.sk, id);
  for (int i = 0; i < 50; i++) {
    Scalar other = Scalar::random(rng);
    if (other == out.y) continue;
    CHECK_FALSE(vrf_verify(kp.pk, id, other, out.proof));
  }
}

TEST_CASE("vrf output stays in [1, q)") {
  SeededRandom rng(31);
  VrfKeypair kp = vrf_keygen(rng);
  for (int i = 0; i < 100; i++) {
    Bytes id = rng.bytes(32);
    VrfOutput out = vrf_eval(kp.sk, id);
    CHECK_FALSE(out.y.is_zero());
  }
}

TEST_CASE("vrf verify is total on malformed proofs") {
  SeededRandom rng(32);
  VrfKeypair kp = vrf_keygen(rng);
  Bytes id = rng.bytes(32);
  VrfOutput out = vrf_eval(kp.sk, id);
  CHECK_FALSE(vrf_verify(kp.pk, id, out.y, Bytes(10, 0)));
  CHECK_FALSE(vrf_verify(kp.pk, id, out.y, Bytes(kVrfProofSize, 0xff)));
  Bytes zeroed(kVrfProofSize, 0x00);
  CHECK_FALSE(vrf_verify(kp.pk, id, out.y, zeroed));
}

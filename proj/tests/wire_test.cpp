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

#include "true2f/wire.hpp"

using namespace true2f;

TEST_CASE("DER signatures round-trip, including the flipped form") {
  SeededRandom rng(300);
  for (int i = 0; i < 200; i++) {
    auto [sk, pk] = ecdsa_keygen(rng);
    Bytes m = rng.bytes(32);
    auto sig = ecdsa_sign(sk, m, Scalar::random(rng));
    REQUIRE(sig);
    for (const EcdsaSignature& s : {*sig, flip(*sig)}) {
      Bytes der = wire::encode_der_signature(s);
      size_t used = 0;
      auto back = wire::decode_der_signature(der, &used);
      REQUIRE(back.has_value());
      CHECK(used == der.size());
      CHECK(*back == s);
    }
  }
}

TEST_CASE("DER decoding is strict") {
  SeededRandom rng(301);
  auto [sk, pk] = ecdsa_keygen(rng);
  auto sig = ecdsa_sign(sk, rng.bytes(16), Scalar::random(rng));
  Bytes der = wire::encode_der_signature(*sig);

  Bytes truncated(der.begin(), der.end() - 1);
  CHECK_FALSE(wire::decode_der_signature(truncated).has_value());

  Bytes bad_tag = der;
  bad_tag[0] = 0x31;
  CHECK_FALSE(wire::decode_der_signature(bad_tag).has_value());

  // Non-minimal integer: widen the first INTEGER with a useless 0x00.
  if ((der[4] & 0x80) == 0) {
    Bytes padded;
    padded.push_back(0x30);
    padded.push_back(static_cast<uint8_t>(der[1] + 1));
    padded.push_back(0x02);
    padded.push_back(static_cast<uint8_t>(der[3] + 1));
    padded.push_back(0x00);
    padded.insert(padded.end(), der.begin() + 4, der.end());
    CHECK_FALSE(wire::decode_der_signature(padded).has_value());
  }
}

TEST_CASE("registration responses round-trip") {
  SeededRandom rng(302);
  for (int i = 0; i < 100; i++) {
    wire::U2fRegistrationResponse r;
    r.user_public_key = Point::mul_generator(Scalar::random(rng));
    r.key_handle = rng.bytes32();
    r.attestation_public_key = Point::mul_generator(Scalar::random(rng));
    auto [sk, pk] = ecdsa_keygen(rng);
    r.attestation_self_signature =
        *ecdsa_sign(sk, rng.bytes(20), Scalar::random(rng));
    r.attestation_signature =
        *ecdsa_sign(sk, rng.bytes(20), Scalar::random(rng));
    Bytes encoded = wire::encode_registration_response(r);
    CHECK(encoded[0] == 0x05);
    auto back = wire::decode_registration_response(encoded);
    REQUIRE(back.has_value());
    CHECK(*back == r);

    Bytes truncated(encoded.begin(), encoded.end() - 3);
    CHECK_FALSE(wire::decode_registration_response(truncated).has_value());
    Bytes extended = encoded;
    extended.push_back(0);
    CHECK_FALSE(wire::decode_registration_response(extended).has_value());
  }
}

TEST_CASE("authentication responses round-trip and truncate the counter") {
  SeededRandom rng(303);
  auto [sk, pk] = ecdsa_keygen(rng);
  for (int i = 0; i < 100; i++) {
    wire::U2fAuthenticationResponse r;
    r.user_presence = static_cast<uint8_t>(i % 2);
    r.counter = static_cast<uint32_t>(rng.u64());
    r.signature = *ecdsa_sign(sk, rng.bytes(16), Scalar::random(rng));
    Bytes encoded = wire::encode_authentication_response(r);
    auto back = wire::decode_authentication_response(encoded);
    REQUIRE(back.has_value());
    CHECK(*back == r);
  }

  // Internal counter 2^32 + 5 carries wire counter 5.
  uint64_t internal = (uint64_t{1} << 32) + 5;
  wire::U2fAuthenticationResponse r;
  r.user_presence = 1;
  r.counter = static_cast<uint32_t>(internal);
  r.signature = *ecdsa_sign(sk, rng.bytes(16), Scalar::random(rng));
  auto back = wire::decode_authentication_response(
      wire::encode_authentication_response(r));
  REQUIRE(back.has_value());
  CHECK(back->counter == 5);

  // Presence byte is constrained to 0x00/0x01.
  Bytes bad = wire::encode_authentication_response(r);
  bad[0] = 0x02;
  CHECK_FALSE(wire::decode_authentication_response(bad).has_value());
}

TEST_CASE("frames round-trip for every message type") {
  SeededRandom rng(304);
  std::vector<wire::Frame> frames;
  frames.push_back(
      wire::make_commit_frame(wire::FrameType::kInitCommit, rng.bytes32()));
  frames.push_back(wire::make_point_frame(
      wire::FrameType::kInitPoint, Point::mul_generator(Scalar::random(rng))));
  frames.push_back(wire::make_opening_frame(
      wire::FrameType::kInitOpen,
      KeygenOpening{Scalar::random(rng), Scalar::random(rng)}));
  frames.push_back(wire::Frame{wire::FrameType::kInitDone, {}});

  wire::RegisterRequest reg;
  reg.id = rng.bytes32();
  reg.hints = make_sqrt_hints(reg.id);
  frames.push_back(wire::make_register_request(reg));

  wire::RegisterResponse reg_resp;
  reg_resp.pk_id = Point::mul_generator(Scalar::random(rng));
  reg_resp.proof = rng.bytes(32 + kVrfProofSize);
  reg_resp.mac_tag = rng.bytes32();
  frames.push_back(wire::make_register_response(reg_resp));

  wire::AuthRequest auth;
  auth.app_hash = rng.bytes32();
  auth.challenge = rng.bytes32();
  auth.id = rng.bytes32();
  auth.presence = 1;
  auth.cached_y = rng.bytes32();
  auth.mac_tag = rng.bytes32();
  auth.sign_commitment = rng.bytes32();
  frames.push_back(wire::make_auth_request(auth));

  frames.push_back(wire::make_point_frame(
      wire::FrameType::kSignPoint, Point::mul_generator(Scalar::random(rng))));
  frames.push_back(wire::make_opening_frame(
      wire::FrameType::kSignOpen,
      KeygenOpening{Scalar::random(rng), Scalar::random(rng)}));
  auto [sk, pk] = ecdsa_keygen(rng);
  frames.push_back(wire::make_signature_frame(
      *ecdsa_sign(sk, rng.bytes(8), Scalar::random(rng))));
  frames.push_back(wire::Frame{wire::FrameType::kSignRestart, {}});
  frames.push_back(wire::make_error(wire::ErrorCode::kBadMac));
  frames.push_back(
      wire::make_commit_frame(wire::FrameType::kSignCommit, rng.bytes32()));

  for (const wire::Frame& f : frames) {
    Bytes encoded = wire::encode_frame(f);
    auto back = wire::decode_frame(encoded);
    REQUIRE(back.has_value());
    CHECK(*back == f);
  }

  // Typed parses reproduce the inputs.
  auto reg_back = wire::parse_register_request(*wire::decode_frame(
      wire::encode_frame(wire::make_register_request(reg))));
  REQUIRE(reg_back.has_value());
  CHECK(reg_back->id == reg.id);
  CHECK(reg_back->hints.roots == reg.hints.roots);

  auto auth_back = wire::parse_auth_request(
      *wire::decode_frame(wire::encode_frame(wire::make_auth_request(auth))));
  REQUIRE(auth_back.has_value());
  CHECK(auth_back->id == auth.id);
  CHECK(auth_back->sign_commitment == auth.sign_commitment);
}

TEST_CASE("frame decoding rejects unknown tags and bad lengths") {
  Bytes frame = wire::encode_frame(wire::Frame{wire::FrameType::kInitDone, {}});
  Bytes bad_tag = frame;
  bad_tag[0] = 0x7f;
  CHECK_FALSE(wire::decode_frame(bad_tag).has_value());

  Bytes bad_len = frame;
  bad_len[4] = 9;  // claims payload the buffer does not have
  CHECK_FALSE(wire::decode_frame(bad_len).has_value());

  CHECK_FALSE(wire::decode_frame(Bytes{}).has_value());
  CHECK_FALSE(wire::decode_frame(Bytes{0x01}).has_value());
}

TEST_CASE("decode fuzz: random bytes never crash any decoder") {
  SeededRandom rng(305);
  int accepted = 0;
  for (int i = 0; i < 20000; i++) {
    size_t len = rng.u64() % 300;
    Bytes junk = rng.bytes(len);
    if (wire::decode_frame(junk)) accepted++;
    wire::decode_registration_response(junk);
    wire::decode_authentication_response(junk);
    wire::decode_der_signature(junk);
    SqrtHints::deserialize(junk);
    EcdsaSignature::from_bytes(junk);
    KeygenOpening::from_bytes(junk);
  }
  // Random bytes essentially never form a valid frame (tag + exact length).
  CHECK(accepted <= 2);
}

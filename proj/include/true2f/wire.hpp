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

#ifndef TRUE2F_WIRE_HPP_
#define TRUE2F_WIRE_HPP_

#include <optional>
#include <span>
#include <variant>

#include "true2f/group.hpp"
#include "true2f/keygen.hpp"
#include "true2f/vrf.hpp"

// Byte-exact codecs for the two wire surfaces:
//
//  * U2F raw messages toward the relying party: the registration response
//    (0x05, 65-byte user key, key-handle length, key handle, attestation
//    container, DER attestation signature) and the authentication response
//    (user-presence byte, 32-bit big-endian counter, DER signature).
//    Signatures are DER as on the real wire; low-s normalization is NOT
//    applied, since the signing protocol legitimately emits either of
//    (c, s) and (c, -s).
//
//  * token <-> browser frames: length-prefixed TLV, tag (1 byte) then a
//    4-byte big-endian payload length. Unknown tags and length mismatches
//    are decode errors, never crashes.
//
// The attestation container is the minimal self-signed form: the attestation
// public key (65 bytes uncompressed) followed by a DER ECDSA self-signature
// over those 65 bytes. Relying parties accept it without chain validation.

namespace true2f {
namespace wire {

// --- DER ECDSA signatures ---

namespace detail_der {

inline void append_der_integer(Bytes& out, const Scalar& v) {
  Bytes32 raw = v.to_bytes();
  size_t start = 0;
  while (start < 31 && raw[start] == 0) start++;
  bool pad = (raw[start] & 0x80) != 0;
  out.push_back(0x02);
  out.push_back(static_cast<uint8_t>((32 - start) + (pad ? 1 : 0)));
  if (pad) out.push_back(0x00);
  out.insert(out.end(), raw.begin() + start, raw.end());
}

// Strict minimal-DER integer; returns bytes consumed or 0 on error.
inline size_t parse_der_integer(std::span<const uint8_t> in, Scalar* out) {
  if (in.size() < 3 || in[0] != 0x02) return 0;
  size_t len = in[1];
  if (len == 0 || len > 33 || in.size() < 2 + len) return 0;
  std::span<const uint8_t> body = in.subspan(2, len);
  if ((body[0] & 0x80) != 0) return 0;  // negative: not a valid scalar
  if (body[0] == 0x00) {
    if (len == 1) {
      // The integer zero; never a valid signature component but encodable.
    } else if ((body[1] & 0x80) == 0) {
      return 0;  // non-minimal leading zero
    }
  }
  if (len == 33 && body[0] != 0x00) return 0;
  Bytes32 padded{};
  size_t value_len = len;
  std::span<const uint8_t> value = body;
  if (len == 33) {
    value = body.subspan(1);
    value_len = 32;
  }
  std::memcpy(padded.data() + (32 - value_len), value.data(), value_len);
  auto s = Scalar::from_bytes(padded);
  if (!s) return 0;
  *out = *s;
  return 2 + len;
}

}  // namespace detail_der

inline Bytes encode_der_signature(const EcdsaSignature& sig) {
  Bytes body;
  detail_der::append_der_integer(body, sig.c);
  detail_der::append_der_integer(body, sig.s);
  Bytes out;
  out.push_back(0x30);
  out.push_back(static_cast<uint8_t>(body.size()));
  append(out, body);
  return out;
}

// Parses one DER signature at the start of `in`; *consumed reports its total
// length so callers can parse concatenated structures.
inline std::optional<EcdsaSignature> decode_der_signature(
    std::span<const uint8_t> in, size_t* consumed = nullptr) {
  if (in.size() < 2 || in[0] != 0x30) return std::nullopt;
  size_t body_len = in[1];
  if (body_len >= 0x80 || in.size() < 2 + body_len) return std::nullopt;
  std::span<const uint8_t> body = in.subspan(2, body_len);
  EcdsaSignature sig{};
  size_t c_len = detail_der::parse_der_integer(body, &sig.c);
  if (c_len == 0) return std::nullopt;
  size_t s_len = detail_der::parse_der_integer(body.subspan(c_len), &sig.s);
  if (s_len == 0 || c_len + s_len != body_len) return std::nullopt;
  if (consumed != nullptr) *consumed = 2 + body_len;
  return sig;
}

// --- U2F raw messages ---

inline constexpr size_t kKeyHandleSize = 32;

struct U2fRegistrationResponse {
  Point user_public_key;
  Bytes32 key_handle;
  Point attestation_public_key;
  EcdsaSignature attestation_self_signature;  // over the 65-byte attestation key
  EcdsaSignature attestation_signature;       // over the registration message

  bool operator==(const U2fRegistrationResponse& o) const {
    return user_public_key == o.user_public_key && key_handle == o.key_handle &&
           attestation_public_key == o.attestation_public_key &&
           attestation_self_signature == o.attestation_self_signature &&
           attestation_signature == o.attestation_signature;
  }
};

inline Bytes encode_registration_response(const U2fRegistrationResponse& r) {
  Bytes out;
  append_u8(out, 0x05);
  append(out, r.user_public_key.encode_uncompressed());
  append_u8(out, kKeyHandleSize);
  append(out, r.key_handle);
  append(out, r.attestation_public_key.encode_uncompressed());
  append(out, encode_der_signature(r.attestation_self_signature));
  append(out, encode_der_signature(r.attestation_signature));
  return out;
}

inline std::optional<U2fRegistrationResponse> decode_registration_response(
    std::span<const uint8_t> in) {
  if (in.size() < 1 + 65 + 1 + kKeyHandleSize + 65 + 8) return std::nullopt;
  if (in[0] != 0x05) return std::nullopt;
  size_t off = 1;
  auto user_pk = Point::decode_uncompressed(in.subspan(off, 65));
  if (!user_pk) return std::nullopt;
  off += 65;
  if (in[off] != kKeyHandleSize) return std::nullopt;
  off += 1;
  U2fRegistrationResponse r{};
  r.user_public_key = *user_pk;
  std::memcpy(r.key_handle.data(), in.data() + off, kKeyHandleSize);
  off += kKeyHandleSize;
  if (in.size() < off + 65) return std::nullopt;
  auto att_pk = Point::decode_uncompressed(in.subspan(off, 65));
  if (!att_pk) return std::nullopt;
  r.attestation_public_key = *att_pk;
  off += 65;
  size_t used = 0;
  auto self_sig = decode_der_signature(in.subspan(off), &used);
  if (!self_sig) return std::nullopt;
  r.attestation_self_signature = *self_sig;
  off += used;
  auto att_sig = decode_der_signature(in.subspan(off), &used);
  if (!att_sig) return std::nullopt;
  r.attestation_signature = *att_sig;
  off += used;
  if (off != in.size()) return std::nullopt;  // trailing bytes
  return r;
}

struct U2fAuthenticationResponse {
  uint8_t user_presence = 0;  // 0x00 or 0x01
  uint32_t counter = 0;       // internal value mod 2^32
  EcdsaSignature signature;

  bool operator==(const U2fAuthenticationResponse& o) const {
    return user_presence == o.user_presence && counter == o.counter &&
           signature == o.signature;
  }
};

inline Bytes encode_authentication_response(const U2fAuthenticationResponse& r) {
  Bytes out;
  append_u8(out, r.user_presence);
  append_u32be(out, r.counter);
  append(out, encode_der_signature(r.signature));
  return out;
}

inline std::optional<U2fAuthenticationResponse> decode_authentication_response(
    std::span<const uint8_t> in) {
  if (in.size() < 1 + 4 + 8) return std::nullopt;
  if (in[0] != 0x00 && in[0] != 0x01) return std::nullopt;
  U2fAuthenticationResponse r{};
  r.user_presence = in[0];
  r.counter = read_u32be(in.subspan(1, 4));
  size_t used = 0;
  auto sig = decode_der_signature(in.subspan(5), &used);
  if (!sig || 5 + used != in.size()) return std::nullopt;
  r.signature = *sig;
  return r;
}

// The message both endpoints sign and the relying party verifies:
// presence byte || appID hash || challenge || key handle || counter (8-byte
// big-endian; internal counters are 34-bit so the wire's 32-bit field
// zero-extends losslessly within the token's lifetime).
inline Bytes build_signed_message(uint8_t presence, const Bytes32& app_hash,
                                  const Bytes32& challenge, const Bytes32& id,
                                  uint64_t counter) {
  Bytes m;
  append_u8(m, presence);
  append(m, app_hash);
  append(m, challenge);
  append(m, id);
  append_u64be(m, counter);
  return m;
}

// --- token <-> browser frames ---

enum class FrameType : uint8_t {
  kInitCommit = 0x01,        // browser: keygen commitment (32)
  kInitPoint = 0x02,         // token: keygen point (33)
  kInitOpen = 0x03,          // browser: keygen opening (64)
  kInitDone = 0x04,          // token: run accepted (0)
  kRegisterRequest = 0x05,   // browser: id (32) || sqrt hints (1 + 32l)
  kRegisterResponse = 0x06,  // token: pk_id (33) || proof (129) || mac (32)
  kAuthRequest = 0x07,       // browser: app hash || chal || id || presence ||
                             //          y || mac || signing commitment (193)
  kSignPoint = 0x08,         // token: signing keygen point (33)
  kSignOpen = 0x09,          // browser: signing keygen opening (64)
  kSignSignature = 0x0a,     // token: raw signature c || s (64)
  kSignRestart = 0x0b,       // token: nonce rejected, rerun signing keygen (0)
  kError = 0x0c,             // either: error code (1)
  kSignCommit = 0x0d,        // browser: fresh signing commitment after a
                             //          restart (32)
};

enum class ErrorCode : uint8_t {
  kNotReady = 1,
  kBadState = 2,
  kBadHints = 3,
  kBadMac = 4,
  kCounterExhausted = 5,
  kKeygenAbort = 6,
  kMalformed = 7,
};

struct Frame {
  FrameType type;
  Bytes payload;

  bool operator==(const Frame& o) const {
    return type == o.type && payload == o.payload;
  }
};

inline Bytes encode_frame(const Frame& f) {
  Bytes out;
  append_u8(out, static_cast<uint8_t>(f.type));
  append_u32be(out, static_cast<uint32_t>(f.payload.size()));
  append(out, f.payload);
  return out;
}

inline bool known_frame_type(uint8_t t) {
  return t >= static_cast<uint8_t>(FrameType::kInitCommit) &&
         t <= static_cast<uint8_t>(FrameType::kSignCommit);
}

inline std::optional<Frame> decode_frame(std::span<const uint8_t> in) {
  if (in.size() < 5) return std::nullopt;
  if (!known_frame_type(in[0])) return std::nullopt;
  uint32_t len = read_u32be(in.subspan(1, 4));
  if (in.size() != 5u + len) return std::nullopt;
  Frame f{static_cast<FrameType>(in[0]), Bytes(in.begin() + 5, in.end())};
  return f;
}

// Typed payloads for the composite frames.

struct RegisterRequest {
  Bytes32 id;
  SqrtHints hints;
};

inline Frame make_register_request(const RegisterRequest& r) {
  Bytes payload;
  append(payload, r.id);
  append(payload, r.hints.serialize());
  return Frame{FrameType::kRegisterRequest, std::move(payload)};
}

inline std::optional<RegisterRequest> parse_register_request(const Frame& f) {
  if (f.type != FrameType::kRegisterRequest || f.payload.size() < 33) {
    return std::nullopt;
  }
  RegisterRequest r;
  std::memcpy(r.id.data(), f.payload.data(), 32);
  auto hints = SqrtHints::deserialize(std::span(f.payload).subspan(32));
  if (!hints) return std::nullopt;
  r.hints = *hints;
  return r;
}

struct RegisterResponse {
  Point pk_id;
  Bytes proof;    // kVifProofSize bytes
  Bytes32 mac_tag;
};

inline Frame make_register_response(const RegisterResponse& r) {
  Bytes payload;
  append(payload, r.pk_id.encode());
  append(payload, r.proof);
  append(payload, r.mac_tag);
  return Frame{FrameType::kRegisterResponse, std::move(payload)};
}

inline std::optional<RegisterResponse> parse_register_response(const Frame& f) {
  constexpr size_t kSize = 33 + 32 + kVrfProofSize + 32;
  if (f.type != FrameType::kRegisterResponse || f.payload.size() != kSize) {
    return std::nullopt;
  }
  auto pk = Point::decode(std::span(f.payload).subspan(0, 33));
  if (!pk || pk->is_identity()) return std::nullopt;
  RegisterResponse r;
  r.pk_id = *pk;
  r.proof.assign(f.payload.begin() + 33,
                 f.payload.begin() + 33 + 32 + kVrfProofSize);
  std::memcpy(r.mac_tag.data(), f.payload.data() + kSize - 32, 32);
  return r;
}

struct AuthRequest {
  Bytes32 app_hash;
  Bytes32 challenge;
  Bytes32 id;
  uint8_t presence = 0;
  Bytes32 cached_y;       // VRF output from the browser's cache
  Bytes32 mac_tag;        // token MAC over (id || y)
  Bytes32 sign_commitment;  // firewall's keygen commitment for signing
};

inline Frame make_auth_request(const AuthRequest& r) {
  Bytes payload;
  append(payload, r.app_hash);
  append(payload, r.challenge);
  append(payload, r.id);
  append_u8(payload, r.presence);
  append(payload, r.cached_y);
  append(payload, r.mac_tag);
  append(payload, r.sign_commitment);
  return Frame{FrameType::kAuthRequest, std::move(payload)};
}

inline std::optional<AuthRequest> parse_auth_request(const Frame& f) {
  constexpr size_t kSize = 32 * 6 + 1;
  if (f.type != FrameType::kAuthRequest || f.payload.size() != kSize) {
    return std::nullopt;
  }
  AuthRequest r;
  const uint8_t* p = f.payload.data();
  std::memcpy(r.app_hash.data(), p, 32);
  std::memcpy(r.challenge.data(), p + 32, 32);
  std::memcpy(r.id.data(), p + 64, 32);
  r.presence = p[96];
  if (r.presence != 0x00 && r.presence != 0x01) return std::nullopt;
  std::memcpy(r.cached_y.data(), p + 97, 32);
  std::memcpy(r.mac_tag.data(), p + 129, 32);
  std::memcpy(r.sign_commitment.data(), p + 161, 32);
  return r;
}

inline Frame make_error(ErrorCode code) {
  return Frame{FrameType::kError, Bytes{static_cast<uint8_t>(code)}};
}

inline std::optional<ErrorCode> parse_error(const Frame& f) {
  if (f.type != FrameType::kError || f.payload.size() != 1) return std::nullopt;
  uint8_t c = f.payload[0];
  if (c < 1 || c > 7) return std::nullopt;
  return static_cast<ErrorCode>(c);
}

inline Frame make_point_frame(FrameType type, const Point& p) {
  auto enc = p.encode();
  return Frame{type, Bytes(enc.begin(), enc.end())};
}

inline std::optional<Point> parse_point_frame(const Frame& f) {
  if (f.payload.size() != 33) return std::nullopt;
  auto p = Point::decode(f.payload);
  if (!p || p->is_identity()) return std::nullopt;
  return p;
}

inline Frame make_opening_frame(FrameType type, const KeygenOpening& o) {
  auto enc = o.to_bytes();
  return Frame{type, Bytes(enc.begin(), enc.end())};
}

inline Frame make_commit_frame(FrameType type, const Bytes32& c) {
  return Frame{type, Bytes(c.begin(), c.end())};
}

inline std::optional<Bytes32> parse_commit_frame(const Frame& f) {
  if (f.payload.size() != 32) return std::nullopt;
  Bytes32 out;
  std::memcpy(out.data(), f.payload.data(), 32);
  return out;
}

inline Frame make_signature_frame(const EcdsaSignature& sig) {
  auto enc = sig.to_bytes();
  return Frame{FrameType::kSignSignature, Bytes(enc.begin(), enc.end())};
}

inline std::optional<EcdsaSignature> parse_signature_frame(const Frame& f) {
  if (f.type != FrameType::kSignSignature) return std::nullopt;
  return EcdsaSignature::from_bytes(f.payload);
}

}  // namespace wire
}  // namespace true2f

#endif  // TRUE2F_WIRE_HPP_

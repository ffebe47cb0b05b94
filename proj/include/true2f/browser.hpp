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

#ifndef TRUE2F_BROWSER_HPP_
#define TRUE2F_BROWSER_HPP_

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "true2f/channel.hpp"
#include "true2f/counter.hpp"
#include "true2f/firewall.hpp"
#include "true2f/token.hpp"
#include "true2f/vif.hpp"

// The browser/agent endpoint. It holds the master public key, the map from
// registrations to per-identity public keys, a replica of the token's counter
// and the cache of MAC-tagged VRF outputs. It audits everything the token
// sends: the identity-family proof at registration, the jointly generated
// nonce and the signature at authentication. The first protocol failure
// permanently disables the token (one-abort policy); afterwards no request
// reaches the channel.
//
// Registrations are keyed by SHA-256(appID hash || key handle), which is also
// the sync-record key: the per-identity public key is recomputable as X^y, so
// a sync record is just (key, y, MAC tag) and the whole sync state stays
// within 4162 + 97 bytes per identity. The counter replica is exported in
// semantic form after folding its log; folding is value-preserving for up to
// 100 identities, which is the structure's supported regime.

namespace true2f {

enum class BrowserError {
  kNone = 0,
  kTokenDisabled,    // one-abort policy: no traffic after the first bot
  kNotInitialized,
  kUnknownIdentity,  // key handle was never registered here
  kCounterExhausted,
  kTokenFailure,     // bot this request; the token is now disabled
};

inline const char* to_string(BrowserError e) {
  switch (e) {
    case BrowserError::kNone: return "none";
    case BrowserError::kTokenDisabled: return "token-disabled";
    case BrowserError::kNotInitialized: return "not-initialized";
    case BrowserError::kUnknownIdentity: return "unknown-identity";
    case BrowserError::kCounterExhausted: return "counter-exhausted";
    case BrowserError::kTokenFailure: return "token-failure";
  }
  return "?";
}

class Browser {
 public:
  static constexpr size_t kRegistrationWarningThreshold = kTableCapacity;

  explicit Browser(RandomSource& rng)
      : rng_(&rng), flash_(kCounterPages) {}

  Browser(const Browser& other)
      : rng_(other.rng_),
        initialized_(other.initialized_),
        token_failed_(other.token_failed_),
        mpk_(other.mpk_),
        keys_(other.keys_),
        cache_(other.cache_),
        registration_count_(other.registration_count_),
        last_abort_(other.last_abort_),
        flash_(other.flash_),
        global_counter_mode_(other.global_counter_mode_),
        global_counter_(other.global_counter_) {
    if (initialized_) counter_.emplace(CounterStore::recover(flash_));
  }

  // --- initialization: two key-generation runs ---

  bool initialize(TokenInterface& token, Channel& channel) {
    if (initialized_ || token_failed_) return false;
    Point points[2];
    for (int run = 0; run < 2; run++) {
      auto [state, commitment] = KeygenBrowserState::commit(*rng_);
      channel.send_to_token(
          wire::make_commit_frame(wire::FrameType::kInitCommit, commitment));
      auto reply = pump(token, channel);
      if (!reply || reply->type != wire::FrameType::kInitPoint) {
        return fail_token();
      }
      auto v_point = wire::parse_point_frame(*reply);
      if (!v_point) return fail_token();
      auto open = state.open(*v_point);
      if (!open) return fail_token();
      channel.send_to_token(
          wire::make_opening_frame(wire::FrameType::kInitOpen, open->opening));
      auto done = pump(token, channel);
      if (!done || done->type != wire::FrameType::kInitDone) {
        return fail_token();
      }
      points[run] = open->public_key;
    }
    mpk_ = VifMasterPublicKey{points[0], points[1]};
    counter_.emplace(CounterStore::init(flash_));
    initialized_ = true;
    return true;
  }

  // --- registration ---

  struct RegistrationResult {
    Bytes32 id;             // the key handle
    Point pk_id;
    Point pk_att;
    EcdsaSignature sig_att;
    Bytes wire_response;    // U2F raw registration response
    bool warning = false;   // at or past the fingerprinting threshold
  };

  std::optional<RegistrationResult> register_identity(
      TokenInterface& token, Channel& channel, const std::string& app_id,
      const Bytes32& challenge, BrowserError* error = nullptr) {
    auto fail = [&](BrowserError e) -> std::optional<RegistrationResult> {
      if (error != nullptr) *error = e;
      return std::nullopt;
    };
    if (token_failed_) return fail(BrowserError::kTokenDisabled);
    if (!initialized_) return fail(BrowserError::kNotInitialized);

    wire::RegisterRequest req;
    req.id = rng_->bytes32();
    req.hints = make_sqrt_hints(req.id);
    channel.send_to_token(wire::make_register_request(req));
    auto reply = pump(token, channel);
    if (!reply || reply->type != wire::FrameType::kRegisterResponse) {
      fail_token();
      return fail(BrowserError::kTokenFailure);
    }
    auto resp = wire::parse_register_response(*reply);
    if (!resp || !vif_verify(mpk_, req.id, resp->pk_id, resp->proof)) {
      fail_token();
      return fail(BrowserError::kTokenFailure);
    }
    auto y = Scalar::from_bytes(std::span(resp->proof).subspan(0, 32));

    Bytes32 key = record_key(app_hash(app_id), req.id);
    keys_[key] = resp->pk_id;
    cache_[key] = CacheRecord{*y, resp->mac_tag};
    registration_count_++;

    // Fresh self-signed attestation per registration.
    auto [sk_att, pk_att] = ecdsa_keygen(*rng_);
    EcdsaSignature self_sig = sign_with_fresh_nonce(
        sk_att, pk_att.encode_uncompressed());
    Bytes att_message = concat({app_hash(app_id), challenge});
    EcdsaSignature sig_att = sign_with_fresh_nonce(sk_att, att_message);

    RegistrationResult out;
    out.id = req.id;
    out.pk_id = resp->pk_id;
    out.pk_att = pk_att;
    out.sig_att = sig_att;
    out.warning = registration_count_ >= kRegistrationWarningThreshold;
    wire::U2fRegistrationResponse wire_resp;
    wire_resp.user_public_key = resp->pk_id;
    wire_resp.key_handle = req.id;
    wire_resp.attestation_public_key = pk_att;
    wire_resp.attestation_self_signature = self_sig;
    wire_resp.attestation_signature = sig_att;
    out.wire_response = wire::encode_registration_response(wire_resp);
    return out;
  }

  // --- authentication ---

  struct AuthResult {
    EcdsaSignature signature;
    uint64_t counter = 0;
    uint8_t presence = 0;
    Bytes wire_response;  // U2F raw authentication response
  };

  std::optional<AuthResult> authenticate(TokenInterface& token,
                                         Channel& channel,
                                         const std::string& app_id,
                                         const Bytes32& challenge,
                                         const Bytes32& id,
                                         bool require_presence,
                                         BrowserError* error = nullptr) {
    auto fail = [&](BrowserError e) -> std::optional<AuthResult> {
      if (error != nullptr) *error = e;
      return std::nullopt;
    };
    if (token_failed_) return fail(BrowserError::kTokenDisabled);
    if (!initialized_) return fail(BrowserError::kNotInitialized);
    Bytes32 app = app_hash(app_id);
    Bytes32 key = record_key(app, id);
    auto key_it = keys_.find(key);
    auto cache_it = cache_.find(key);
    if (key_it == keys_.end() || cache_it == cache_.end()) {
      return fail(BrowserError::kUnknownIdentity);  // no token interaction
    }

    std::optional<uint64_t> n;
    if (global_counter_mode_) {
      n = ++global_counter_;
    } else {
      n = counter_->inc(id);
    }
    if (!n) return fail(BrowserError::kCounterExhausted);
    uint8_t presence = require_presence ? 0x01 : 0x00;
    Bytes m = wire::build_signed_message(presence, app, challenge, id, *n);
    FirewallSession firewall(key_it->second, m);

    auto commitment = firewall.start(*rng_);
    wire::AuthRequest req;
    req.app_hash = app;
    req.challenge = challenge;
    req.id = id;
    req.presence = presence;
    req.cached_y = cache_it->second.y.to_bytes();
    req.mac_tag = cache_it->second.mac_tag;
    req.sign_commitment = *commitment;
    channel.send_to_token(wire::make_auth_request(req));

    for (int round = 0; round < 8; round++) {
      auto point_frame = pump(token, channel);
      if (!point_frame || point_frame->type != wire::FrameType::kSignPoint) {
        fail_token();
        return fail(BrowserError::kTokenFailure);
      }
      auto v_point = wire::parse_point_frame(*point_frame);
      if (!v_point) {
        fail_token();
        return fail(BrowserError::kTokenFailure);
      }
      auto opening = firewall.on_point(*v_point);
      if (!opening) {
        fail_token();
        return fail(BrowserError::kTokenFailure);
      }
      channel.send_to_token(
          wire::make_opening_frame(wire::FrameType::kSignOpen, *opening));
      auto sig_frame = pump(token, channel);
      if (!sig_frame) {
        fail_token();
        return fail(BrowserError::kTokenFailure);
      }
      if (sig_frame->type == wire::FrameType::kSignRestart) {
        firewall.restart();
        auto fresh = firewall.start(*rng_);
        if (!fresh) {
          fail_token();
          return fail(BrowserError::kTokenFailure);
        }
        channel.send_to_token(
            wire::make_commit_frame(wire::FrameType::kSignCommit, *fresh));
        continue;
      }
      auto sig = wire::parse_signature_frame(*sig_frame);
      if (!sig) {
        fail_token();
        return fail(BrowserError::kTokenFailure);
      }
      auto output = firewall.on_signature(*sig, *rng_);
      if (!output) {
        last_abort_ = firewall.abort_reason();
        fail_token();
        return fail(BrowserError::kTokenFailure);
      }
      AuthResult out;
      out.signature = *output;
      out.counter = *n;
      out.presence = presence;
      wire::U2fAuthenticationResponse wire_resp;
      wire_resp.user_presence = presence;
      wire_resp.counter = static_cast<uint32_t>(*n);
      wire_resp.signature = *output;
      out.wire_response = wire::encode_authentication_response(wire_resp);
      return out;
    }
    fail_token();
    return fail(BrowserError::kTokenFailure);
  }

  // --- sync state ---

  // Versioned export: header, master public key, folded counter table, one
  // 96-byte record per registration; integers little-endian. Within
  // 4162 + 97*I bytes for I registered identities.
  Bytes sync_export() {
    if (!initialized_) throw InternalError("sync_export before initialize");
    if (!counter_->fold_log()) throw InternalError("counter exhausted in export");
    Bytes out;
    append(out, as_span(std::string("T2FS")));
    append_u8(out, 1);  // version
    append_u8(out, token_failed_ ? 1 : 0);
    append(out, mpk_.big_x.encode());
    append(out, mpk_.pk_vrf.encode());
    Bytes table = counter_->serialize_table();
    append_u16le(out, static_cast<uint16_t>(table.size()));
    append(out, table);
    append_u16le(out, static_cast<uint16_t>(cache_.size()));
    for (const auto& [key, record] : cache_) {
      append(out, key);
      append(out, record.y.to_bytes());
      append(out, record.mac_tag);
    }
    return out;
  }

  static std::optional<Browser> sync_import(std::span<const uint8_t> in,
                                            RandomSource& rng) {
    if (in.size() < 4 + 1 + 1 + 66 + 2) return std::nullopt;
    if (std::memcmp(in.data(), "T2FS", 4) != 0 || in[4] != 1) {
      return std::nullopt;
    }
    Browser b(rng);
    b.token_failed_ = in[5] != 0;
    auto big_x = Point::decode(in.subspan(6, 33));
    auto pk_vrf = Point::decode(in.subspan(39, 33));
    if (!big_x || !pk_vrf || big_x->is_identity() || pk_vrf->is_identity()) {
      return std::nullopt;
    }
    b.mpk_ = VifMasterPublicKey{*big_x, *pk_vrf};
    size_t off = 72;
    if (in.size() < off + 2) return std::nullopt;
    size_t table_len = read_u16le(in.subspan(off, 2));
    off += 2;
    if (in.size() < off + table_len) return std::nullopt;
    auto counter =
        CounterStore::deserialize_table(b.flash_, in.subspan(off, table_len));
    if (!counter) return std::nullopt;
    b.counter_.emplace(std::move(*counter));
    off += table_len;
    if (in.size() < off + 2) return std::nullopt;
    size_t n = read_u16le(in.subspan(off, 2));
    off += 2;
    if (in.size() != off + n * 96) return std::nullopt;
    for (size_t i = 0; i < n; i++) {
      const uint8_t* p = in.data() + off + i * 96;
      Bytes32 key;
      std::memcpy(key.data(), p, 32);
      auto y = Scalar::from_bytes(std::span(p + 32, 32));
      if (!y || y->is_zero()) return std::nullopt;
      CacheRecord record;
      record.y = *y;
      std::memcpy(record.mac_tag.data(), p + 64, 32);
      if (b.cache_.count(key) != 0) return std::nullopt;
      b.cache_[key] = record;
      // The per-identity public key is recomputed, not trusted bytes.
      b.keys_[key] = b.mpk_.big_x.mul(*y);
    }
    b.registration_count_ = n;
    b.initialized_ = true;
    return b;
  }

  // --- state accessors ---

  bool token_failed() const { return token_failed_; }
  bool initialized() const { return initialized_; }
  size_t registration_count() const { return registration_count_; }
  const VifMasterPublicKey& mpk() const { return mpk_; }
  FirewallAbort last_abort() const { return last_abort_; }
  uint64_t replica_counter(std::span<const uint8_t> id) const {
    return counter_ ? counter_->value(id) : 0;
  }
  std::optional<Point> registered_key(const std::string& app_id,
                                      const Bytes32& id) const {
    auto it = keys_.find(record_key(app_hash(app_id), id));
    if (it == keys_.end()) return std::nullopt;
    return it->second;
  }

  static Bytes32 app_hash(const std::string& app_id) {
    return sha256(as_span(app_id));
  }

  // Straw-man replica mode matching a single-global-counter token; exists
  // only so the clone and fingerprinting failure scenarios are reproducible.
  void set_global_counter_mode(bool on) { global_counter_mode_ = on; }

 private:
  struct CacheRecord {
    Scalar y;
    Bytes32 mac_tag{};
  };

  static Bytes32 record_key(const Bytes32& app, const Bytes32& id) {
    return sha256(concat({app, id}));
  }

  bool fail_token() {
    token_failed_ = true;
    return false;
  }

  // Drives the passive token until it replies.
  std::optional<wire::Frame> pump(TokenInterface& token, Channel& channel) {
    while (auto f = channel.next_for_token()) {
      token.handle_frame(*f, channel);
    }
    return channel.next_for_browser();
  }

  EcdsaSignature sign_with_fresh_nonce(const Scalar& sk,
                                       std::span<const uint8_t> m) {
    for (;;) {
      Scalar nonce = Scalar::random(*rng_);
      if (nonce.is_zero()) continue;
      auto sig = ecdsa_sign(sk, m, nonce);
      if (sig) return *sig;
    }
  }

  RandomSource* rng_;
  bool initialized_ = false;
  bool token_failed_ = false;
  VifMasterPublicKey mpk_;
  std::map<Bytes32, Point> keys_;
  std::map<Bytes32, CacheRecord> cache_;
  size_t registration_count_ = 0;
  FirewallAbort last_abort_ = FirewallAbort::kNone;
  FlashSim flash_;
  std::optional<CounterStore> counter_;
  bool global_counter_mode_ = false;
  uint64_t global_counter_ = 0;
};

}  // namespace true2f

#endif  // TRUE2F_BROWSER_HPP_

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

#ifndef TRUE2F_TOKEN_HPP_
#define TRUE2F_TOKEN_HPP_

#include <memory>
#include <optional>

#include "true2f/channel.hpp"
#include "true2f/counter.hpp"
#include "true2f/firewall.hpp"
#include "true2f/vif.hpp"

// The token endpoint. Initialization runs the collaborative key-generation
// protocol twice (master signing key, then VRF key), samples a local MAC key,
// and initializes the counter. Registration evaluates the identity family
// with browser-supplied square-root hints and returns the per-identity public
// key, its proof, and a MAC tag binding (id, y) so later authentications can
// skip the VRF. Authentication checks the MAC, increments the counter,
// derives the per-identity secret with plain Z_q arithmetic, and plays the
// signer side of the firewalled signing protocol — two group exponentiations
// for the whole operation.
//
// The token never transmits anything derived from its secrets except the
// audited protocol fields: keygen messages, pk_id, the proof, the MAC tag,
// and the protocol signature.
//
// Adversarial variants override the protected hooks; the frame surface and
// everything the browser sees stay bit-compatible.

namespace true2f {

class Token : public TokenInterface {
 public:
  enum class Phase { kUninitialized, kReady, kFailed };

  explicit Token(RandomSource& rng)
      : rng_(&rng), flash_(kCounterPages) {}

  Token(const Token& other)
      : rng_(other.rng_),
        phase_(other.phase_),
        init_runs_done_(other.init_runs_done_),
        x_(other.x_),
        sk_vrf_(other.sk_vrf_),
        mac_key_(other.mac_key_),
        flash_(other.flash_) {
    if (phase_ == Phase::kReady) {
      counter_.emplace(CounterStore::recover(flash_));
    }
  }

  void handle_frame(const wire::Frame& frame, Channel& channel) override {
    exp_baseline_ = exp_count();
    dispatch(frame, channel);
    exps_total_ += exp_count() - exp_baseline_;
  }

  Phase phase() const { return phase_; }
  uint64_t exponentiations() const { return exps_total_; }

  // A physical clone: same secrets, same counter state. Variants override so
  // cloning preserves their behavior.
  virtual std::unique_ptr<Token> clone() const {
    return std::unique_ptr<Token>(new Token(*this));
  }

  // Test access: the browser-visible master public key for cross-checks.
  VifMasterPublicKey master_public_key() const {
    return VifMasterPublicKey{Point::mul_generator(x_),
                              Point::mul_generator(sk_vrf_)};
  }
  uint64_t counter_value(std::span<const uint8_t> id) const {
    return counter_ ? counter_->value(id) : 0;
  }
  FlashSim& flash() { return flash_; }

  // Simulated non-volatile state, for embodiments that persist the token
  // across process lifetimes (the CLI). The flash image is the raw 3-page
  // dump; secrets never take any other path out of the token.
  struct Snapshot {
    Scalar x;
    Scalar sk_vrf;
    Bytes32 mac_key{};
    Bytes flash_image;
  };

  std::optional<Snapshot> snapshot() const {
    if (phase_ != Phase::kReady) return std::nullopt;
    return Snapshot{x_, sk_vrf_, mac_key_, flash_.serialize()};
  }

  static std::unique_ptr<Token> restore(RandomSource& rng,
                                        const Snapshot& snap) {
    auto flash = FlashSim::deserialize(snap.flash_image);
    if (!flash || flash->num_pages() != kCounterPages) return nullptr;
    auto token = std::unique_ptr<Token>(new Token(rng));
    token->x_ = snap.x;
    token->sk_vrf_ = snap.sk_vrf;
    token->mac_key_ = snap.mac_key;
    token->flash_ = std::move(*flash);
    token->counter_.emplace(CounterStore::recover(token->flash_));
    token->init_runs_done_ = 2;
    token->phase_ = Phase::kReady;
    return token;
  }

 protected:
  // --- hooks for adversarial variants ---

  // Entropy contributed to a key-generation run (honest: uniform).
  virtual Scalar keygen_entropy() { return Scalar::random(*rng_); }

  // Nonce actually used for the protocol signature (honest: the joint one).
  virtual Scalar signing_nonce(const Scalar& joint) { return joint; }

  // Per-identity public key reported at registration (honest: the real one).
  virtual Point registered_public_key(const VifIdentityKey& key) {
    return key.pk;
  }

  // Counter increment for an authentication (honest: one increment).
  virtual std::optional<uint64_t> auth_counter(std::span<const uint8_t> id) {
    return counter_->inc(id);
  }

  // Called before handling each request frame; a variant may hijack the
  // response (selective abort). Returns true when hijacked.
  virtual bool intercept(const wire::Frame&, Channel&) { return false; }

  RandomSource* rng_;
  Phase phase_ = Phase::kUninitialized;

 private:
  void dispatch(const wire::Frame& frame, Channel& channel) {
    using wire::ErrorCode;
    using wire::Frame;
    using wire::FrameType;

    if (phase_ == Phase::kFailed) {
      channel.send_to_browser(wire::make_error(ErrorCode::kBadState));
      return;
    }
    if (intercept(frame, channel)) return;

    switch (frame.type) {
      case FrameType::kInitCommit: {
        if (phase_ != Phase::kUninitialized || init_runs_done_ >= 2) {
          channel.send_to_browser(wire::make_error(ErrorCode::kBadState));
          return;
        }
        auto commitment = wire::parse_commit_frame(frame);
        if (!commitment) {
          channel.send_to_browser(wire::make_error(ErrorCode::kMalformed));
          return;
        }
        Scalar v_prime = keygen_entropy();
        init_keygen_.emplace();
        init_keygen_->v_prime = v_prime;
        init_keygen_->commitment = *commitment;
        Point v_point = Point::mul_generator(v_prime);
        channel.send_to_browser(
            wire::make_point_frame(FrameType::kInitPoint, v_point));
        return;
      }
      case FrameType::kInitOpen: {
        if (phase_ != Phase::kUninitialized || !init_keygen_) {
          channel.send_to_browser(wire::make_error(ErrorCode::kBadState));
          return;
        }
        auto opening = KeygenOpening::from_bytes(frame.payload);
        if (!opening) {
          channel.send_to_browser(wire::make_error(ErrorCode::kMalformed));
          return;
        }
        if (keygen_commitment(opening->v, opening->r) !=
            init_keygen_->commitment) {
          init_keygen_.reset();
          channel.send_to_browser(wire::make_error(ErrorCode::kKeygenAbort));
          return;
        }
        Scalar secret = opening->v.add(init_keygen_->v_prime);
        init_keygen_.reset();
        if (init_runs_done_ == 0) {
          x_ = secret;
        } else {
          sk_vrf_ = secret;
        }
        init_runs_done_++;
        if (init_runs_done_ == 2) {
          // MAC key is token-local; it authenticates the browser's cache back
          // to the token and never leaves it.
          mac_key_ = rng_->bytes32();
          counter_.emplace(CounterStore::init(flash_));
          phase_ = Phase::kReady;
        }
        channel.send_to_browser(Frame{FrameType::kInitDone, {}});
        return;
      }
      case FrameType::kRegisterRequest: {
        if (phase_ != Phase::kReady) {
          channel.send_to_browser(wire::make_error(ErrorCode::kNotReady));
          return;
        }
        auto req = wire::parse_register_request(frame);
        if (!req) {
          channel.send_to_browser(wire::make_error(ErrorCode::kMalformed));
          return;
        }
        auto h = hash_to_point_with_hints(req->id, req->hints);
        if (!h) {
          // Browser fault, not a token failure: stay Ready.
          channel.send_to_browser(wire::make_error(ErrorCode::kBadHints));
          return;
        }
        VifMasterKeypair msk{x_, sk_vrf_, Point::mul_generator(x_),
                             Point::mul_generator(sk_vrf_)};
        VifIdentityKey key = vif_eval(msk, req->id, &*h);
        wire::RegisterResponse resp;
        resp.pk_id = registered_public_key(key);
        resp.proof = key.proof;
        resp.mac_tag = mac_tag(req->id, key.y);
        channel.send_to_browser(wire::make_register_response(resp));
        return;
      }
      case FrameType::kAuthRequest: {
        if (phase_ != Phase::kReady) {
          channel.send_to_browser(wire::make_error(ErrorCode::kNotReady));
          return;
        }
        auto req = wire::parse_auth_request(frame);
        if (!req) {
          channel.send_to_browser(wire::make_error(ErrorCode::kMalformed));
          return;
        }
        // MAC check gates everything, including the counter increment.
        auto y = Scalar::from_bytes(req->cached_y);
        if (!y || y->is_zero() ||
            mac_tag(req->id, *y) != req->mac_tag) {
          channel.send_to_browser(wire::make_error(ErrorCode::kBadMac));
          return;
        }
        auto n = auth_counter(req->id);
        if (!n) {
          channel.send_to_browser(
              wire::make_error(ErrorCode::kCounterExhausted));
          return;
        }
        auto sk_id = vif_secret_from_cached(x_, *y);
        if (!sk_id) {
          channel.send_to_browser(wire::make_error(ErrorCode::kBadMac));
          return;
        }
        Bytes m = wire::build_signed_message(req->presence, req->app_hash,
                                             req->challenge, req->id, *n);
        signer_sk_ = *sk_id;
        signer_m_ = m;
        signer_.emplace(*sk_id, std::move(m));
        start_signing_round(req->sign_commitment, channel);
        return;
      }
      case FrameType::kSignCommit: {
        // Only legal while a signing session awaits a post-restart round.
        if (phase_ != Phase::kReady || !signer_ ||
            signer_->phase() != SignerSession::Phase::kAwaitCommit) {
          channel.send_to_browser(wire::make_error(ErrorCode::kBadState));
          return;
        }
        auto commitment = wire::parse_commit_frame(frame);
        if (!commitment) {
          channel.send_to_browser(wire::make_error(ErrorCode::kMalformed));
          return;
        }
        start_signing_round(*commitment, channel);
        return;
      }
      case FrameType::kSignOpen: {
        if (phase_ != Phase::kReady || !signer_) {
          channel.send_to_browser(wire::make_error(ErrorCode::kBadState));
          return;
        }
        auto opening = KeygenOpening::from_bytes(frame.payload);
        if (!opening) {
          channel.send_to_browser(wire::make_error(ErrorCode::kMalformed));
          return;
        }
        auto outcome = signer_->on_open(*opening);
        using Kind = SignerSession::SignOutcome::Kind;
        switch (outcome.kind) {
          case Kind::kSignature: {
            EcdsaSignature sig = *outcome.signature;
            Scalar nonce = signing_nonce(signer_->nonce());
            if (nonce != signer_->nonce()) {
              // Variant hook substituted its own nonce.
              auto subst = ecdsa_sign(signer_sk_unsafe(), signer_m_unsafe(),
                                      nonce);
              if (subst) sig = *subst;
            }
            signer_.reset();
            channel.send_to_browser(wire::make_signature_frame(sig));
            return;
          }
          case Kind::kRestart:
            channel.send_to_browser(
                wire::Frame{wire::FrameType::kSignRestart, {}});
            return;
          case Kind::kCommitMismatch:
            // The browser cheated in the nonce protocol; this token is done.
            signer_.reset();
            phase_ = Phase::kFailed;
            channel.send_to_browser(wire::make_error(ErrorCode::kKeygenAbort));
            return;
          case Kind::kOrderViolation:
            channel.send_to_browser(wire::make_error(ErrorCode::kBadState));
            return;
        }
        return;
      }
      default:
        channel.send_to_browser(wire::make_error(ErrorCode::kBadState));
        return;
    }
  }

  void start_signing_round(const Bytes32& commitment, Channel& channel) {
    auto v_point = signer_->on_commit_with_entropy(commitment, keygen_entropy());
    if (!v_point) {
      channel.send_to_browser(wire::make_error(wire::ErrorCode::kBadState));
      return;
    }
    channel.send_to_browser(
        wire::make_point_frame(wire::FrameType::kSignPoint, *v_point));
  }

  Bytes32 mac_tag(std::span<const uint8_t> id, const Scalar& y) const {
    Bytes input;
    append(input, id);
    append(input, y.to_bytes());
    return hmac_sha256(mac_key_, input);
  }

 protected:
  // Variant support: the per-identity key and message of the live signing
  // session (used only by nonce-substituting variants).
  const Scalar& signer_sk_unsafe() const { return signer_sk_; }
  const Bytes& signer_m_unsafe() const { return signer_m_; }

  struct InitKeygen {
    Scalar v_prime;
    Bytes32 commitment;
  };
  std::optional<InitKeygen> init_keygen_;

  int init_runs_done_ = 0;
  Scalar x_;
  Scalar sk_vrf_;
  Bytes32 mac_key_{};
  FlashSim flash_;
  std::optional<CounterStore> counter_;

  // Live signing session. SignerSession owns copies of sk and m; the spares
  // here feed the nonce-substitution hook.
  std::optional<SignerSession> signer_;
  Scalar signer_sk_;
  Bytes signer_m_;

 private:
  uint64_t exp_baseline_ = 0;
  uint64_t exps_total_ = 0;
};

}  // namespace true2f

#endif  // TRUE2F_TOKEN_HPP_

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

#ifndef TRUE2F_FIREWALL_HPP_
#define TRUE2F_FIREWALL_HPP_

#include <optional>
#include <utility>

#include "true2f/group.hpp"
#include "true2f/keygen.hpp"

// Firewalled ECDSA signing. The two parties run the collaborative
// key-generation protocol to fix the signing nonce jointly (signer in the
// token role, firewall in the browser role), the signer signs with exactly
// that nonce, and the firewall audits: the signature must verify and the
// recovered nonce point must be the jointly generated R up to sign. The
// firewall then releases sigma or flip(sigma) with a local coin, so the bits
// that leave the pair carry no signer-chosen randomness.
//
// Honest message trace: commitment, V', opening, sigma - four messages.
//
// A nonce rejection inside ECDSA.Sign (c = 0 or s = 0, probability ~2^-224)
// restarts the whole protocol with a fresh joint nonce; both parties rerun
// from the commitment.

namespace true2f {

enum class FirewallAbort {
  kNone = 0,
  kKeygenAbort,    // signer reported a commitment mismatch
  kVerifyFailed,   // sigma does not verify under pk (includes counter desync)
  kNonceMismatch,  // sigma verifies but was not made with the joint nonce
  kOrderViolation, // message in the wrong phase
};

inline const char* to_string(FirewallAbort a) {
  switch (a) {
    case FirewallAbort::kNone: return "none";
    case FirewallAbort::kKeygenAbort: return "keygen-abort";
    case FirewallAbort::kVerifyFailed: return "verify-failed";
    case FirewallAbort::kNonceMismatch: return "nonce-mismatch";
    case FirewallAbort::kOrderViolation: return "order-violation";
  }
  return "?";
}

// Signer (token) side. Holds sk and m; consumes the two browser messages.
class SignerSession {
 public:
  SignerSession(Scalar sk, Bytes m) : sk_(std::move(sk)), m_(std::move(m)) {}

  enum class Phase { kAwaitCommit, kAwaitOpen, kDone, kAborted };

  // Keygen step 2. Returns V'.
  std::optional<Point> on_commit(const Bytes32& commitment, RandomSource& rng) {
    return on_commit_with_entropy(commitment, Scalar::random(rng));
  }

  std::optional<Point> on_commit_with_entropy(const Bytes32& commitment,
                                              Scalar v_prime) {
    if (phase_ != Phase::kAwaitCommit) return std::nullopt;
    auto [st, v_point] =
        KeygenTokenState::respond_with_entropy(commitment, std::move(v_prime));
    keygen_ = std::move(st);
    phase_ = Phase::kAwaitOpen;
    return v_point;
  }

  struct SignOutcome {
    enum class Kind {
      kSignature,       // sigma produced with the joint nonce
      kRestart,         // nonce rejected by ECDSA.Sign: rerun from step 1
      kCommitMismatch,  // keygen bot; the firewall will output bot
      kOrderViolation,
    };
    Kind kind = Kind::kOrderViolation;
    std::optional<EcdsaSignature> signature;
  };

  // Keygen step 4 plus the signing step.
  SignOutcome on_open(const KeygenOpening& opening) {
    SignOutcome out;
    if (phase_ != Phase::kAwaitOpen) {
      out.kind = SignOutcome::Kind::kOrderViolation;
      return out;
    }
    auto finish = keygen_.finish(opening);
    if (!finish.secret) {
      phase_ = Phase::kAborted;
      out.kind = finish.error == KeygenError::kCommitMismatch
                     ? SignOutcome::Kind::kCommitMismatch
                     : SignOutcome::Kind::kOrderViolation;
      return out;
    }
    nonce_ = *finish.secret;
    if (nonce_.is_zero()) {
      // Joint nonce hit zero; indistinguishable from the c=0/s=0 corner.
      phase_ = Phase::kAwaitCommit;
      out.kind = SignOutcome::Kind::kRestart;
      return out;
    }
    auto sig = ecdsa_sign(sk_, m_, nonce_);
    if (!sig) {
      phase_ = Phase::kAwaitCommit;
      out.kind = SignOutcome::Kind::kRestart;
      return out;
    }
    phase_ = Phase::kDone;
    out.kind = SignOutcome::Kind::kSignature;
    out.signature = *sig;
    return out;
  }

  Phase phase() const { return phase_; }
  const Scalar& nonce() const { return nonce_; }

 private:
  Phase phase_ = Phase::kAwaitCommit;
  Scalar sk_;
  Bytes m_;
  Scalar nonce_;
  KeygenTokenState keygen_;
};

// Firewall (browser) side. Holds pk and its own m; audits the signature.
class FirewallSession {
 public:
  FirewallSession(Point pk, Bytes m) : pk_(std::move(pk)), m_(std::move(m)) {}

  enum class Phase { kStart, kAwaitPoint, kAwaitSignature, kOutput, kBot };

  // Keygen step 1. Returns the commitment.
  std::optional<Bytes32> start(RandomSource& rng) {
    if (phase_ != Phase::kStart) return std::nullopt;
    auto [st, commitment] = KeygenBrowserState::commit(rng);
    keygen_ = std::move(st);
    phase_ = Phase::kAwaitPoint;
    return commitment;
  }

  // Keygen step 3. Returns the opening; R = V' * g^v is retained.
  std::optional<KeygenOpening> on_point(const Point& v_prime) {
    if (phase_ != Phase::kAwaitPoint) return std::nullopt;
    auto open = keygen_.open(v_prime);
    if (!open) return std::nullopt;
    joint_r_ = open->public_key;
    phase_ = Phase::kAwaitSignature;
    return open->opening;
  }

  // Final step: verify, audit the nonce point, rerandomize.
  std::optional<EcdsaSignature> on_signature(const EcdsaSignature& sig,
                                             RandomSource& rng) {
    if (phase_ != Phase::kAwaitSignature) {
      return bot(FirewallAbort::kOrderViolation);
    }
    if (!ecdsa_verify(pk_, m_, sig)) {
      return bot(FirewallAbort::kVerifyFailed);
    }
    auto r_abs = recover_nonce_point(pk_, m_, sig);
    if (!r_abs) {
      return bot(FirewallAbort::kVerifyFailed);
    }
    if (*r_abs != joint_r_ && *r_abs != joint_r_.inverse()) {
      return bot(FirewallAbort::kNonceMismatch);
    }
    // Rerandomize with browser-local randomness, independent of transcript.
    uint8_t coin;
    rng.fill({&coin, 1});
    flipped_ = (coin & 1) != 0;
    output_ = flipped_ ? flip(sig) : sig;
    phase_ = Phase::kOutput;
    return output_;
  }

  // The signer reported a keygen abort (or the transport died): output bot.
  void on_signer_abort() { bot(FirewallAbort::kKeygenAbort); }

  // Protocol restart after a nonce rejection: fresh joint nonce, same inputs.
  void restart() {
    if (phase_ == Phase::kBot) return;
    phase_ = Phase::kStart;
    keygen_ = KeygenBrowserState();
  }

  Phase phase() const { return phase_; }
  FirewallAbort abort_reason() const { return abort_; }
  bool flipped() const { return flipped_; }
  const Point& joint_nonce_point() const { return joint_r_; }

 private:
  std::optional<EcdsaSignature> bot(FirewallAbort reason) {
    phase_ = Phase::kBot;
    abort_ = reason;
    return std::nullopt;
  }

  Phase phase_ = Phase::kStart;
  Point pk_;
  Bytes m_;
  Point joint_r_;
  KeygenBrowserState keygen_;
  FirewallAbort abort_ = FirewallAbort::kNone;
  bool flipped_ = false;
  EcdsaSignature output_{};
};

struct FirewallRunResult {
  std::optional<EcdsaSignature> signature;
  FirewallAbort abort = FirewallAbort::kNone;
  bool flipped = false;
  int messages = 0;  // messages exchanged in the successful round
  int restarts = 0;
};

// Honest in-process composition of the two sessions, with the restart loop
// for nonce rejections.
inline FirewallRunResult run_firewalled_sign(const Scalar& sk,
                                             std::span<const uint8_t> m_signer,
                                             const Point& pk,
                                             std::span<const uint8_t> m_firewall,
                                             RandomSource& signer_rng,
                                             RandomSource& firewall_rng) {
  FirewallRunResult result;
  FirewallSession firewall(pk, Bytes(m_firewall.begin(), m_firewall.end()));
  for (int attempt = 0; attempt < 8; attempt++) {
    SignerSession signer(sk, Bytes(m_signer.begin(), m_signer.end()));
    result.messages = 0;

    auto commitment = firewall.start(firewall_rng);
    if (!commitment) throw InternalError("firewall start out of phase");
    result.messages++;

    auto v_prime = signer.on_commit(*commitment, signer_rng);
    if (!v_prime) throw InternalError("signer commit out of phase");
    result.messages++;

    auto opening = firewall.on_point(*v_prime);
    if (!opening) throw InternalError("firewall point out of phase");
    result.messages++;

    auto outcome = signer.on_open(*opening);
    using Kind = SignerSession::SignOutcome::Kind;
    if (outcome.kind == Kind::kRestart) {
      result.restarts++;
      firewall.restart();
      continue;
    }
    if (outcome.kind != Kind::kSignature) {
      firewall.on_signer_abort();
      result.abort = firewall.abort_reason();
      return result;
    }
    result.messages++;

    auto sig = firewall.on_signature(*outcome.signature, firewall_rng);
    if (!sig) {
      result.abort = firewall.abort_reason();
      return result;
    }
    result.signature = *sig;
    result.flipped = firewall.flipped();
    return result;
  }
  throw InternalError("nonce rejected repeatedly; broken randomness");
}

}  // namespace true2f

#endif  // TRUE2F_FIREWALL_HPP_

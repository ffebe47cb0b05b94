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

#ifndef TRUE2F_KEYGEN_HPP_
#define TRUE2F_KEYGEN_HPP_

#include <optional>
#include <utility>

#include "true2f/group.hpp"

// Commit-reveal collaborative key generation. The browser commits to v, the
// token replies with V' = g^v' (its single exponentiation), the browser opens
// (v, r) and outputs X = V' * g^v, and the token checks the commitment and
// outputs x = v + v'. Out-of-order messages are a distinct error from a
// commitment mismatch so transport bugs never masquerade as cryptographic
// aborts.
//
// Wire sizes: commitment 32 bytes, point 33 bytes, opening 64 bytes.

namespace true2f {

struct KeygenOpening {
  Scalar v;
  Scalar r;

  std::array<uint8_t, 64> to_bytes() const {
    std::array<uint8_t, 64> out{};
    Bytes32 vb = v.to_bytes(), rb = r.to_bytes();
    std::memcpy(out.data(), vb.data(), 32);
    std::memcpy(out.data() + 32, rb.data(), 32);
    return out;
  }

  static std::optional<KeygenOpening> from_bytes(std::span<const uint8_t> in) {
    if (in.size() != 64) return std::nullopt;
    auto v = Scalar::from_bytes(in.subspan(0, 32));
    auto r = Scalar::from_bytes(in.subspan(32, 32));
    if (!v || !r) return std::nullopt;
    return KeygenOpening{*v, *r};
  }
};

// Hc(v, r) = SHA-256(tag || v || r), a statistically hiding commitment under
// the usual random-oracle reading.
inline Bytes32 keygen_commitment(const Scalar& v, const Scalar& r) {
  Bytes input;
  append(input, as_span(std::string("true2f-keygen-commit")));
  append(input, v.to_bytes());
  append(input, r.to_bytes());
  return sha256(input);
}

enum class KeygenError {
  kOrderViolation,   // message arrived in the wrong protocol phase
  kCommitMismatch,   // opening does not match the commitment: token outputs bot
};

class KeygenBrowserState {
 public:
  enum class Phase { kCommitted, kDone, kAborted };

  // Step 1: sample v, r and commit.
  static std::pair<KeygenBrowserState, Bytes32> commit(RandomSource& rng) {
    KeygenBrowserState st;
    st.v_ = Scalar::random(rng);
    st.r_ = Scalar::random(rng);
    st.commitment_ = keygen_commitment(st.v_, st.r_);
    st.phase_ = Phase::kCommitted;
    return {std::move(st), st.commitment_};
  }

  // Step 3: open the commitment; outputs X = V' * g^v.
  struct OpenResult {
    Point public_key;
    KeygenOpening opening;
  };
  std::optional<OpenResult> open(const Point& v_prime) {
    if (phase_ != Phase::kCommitted) return std::nullopt;
    public_key_ = v_prime.add(Point::mul_generator(v_));
    phase_ = Phase::kDone;
    return OpenResult{public_key_, KeygenOpening{v_, r_}};
  }

  Phase phase() const { return phase_; }
  const Point& public_key() const { return public_key_; }
  const Bytes32& commitment() const { return commitment_; }
  const Scalar& v() const { return v_; }
  const Scalar& r() const { return r_; }

 private:
  Phase phase_ = Phase::kAborted;
  Scalar v_, r_;
  Bytes32 commitment_{};
  Point public_key_;
};

class KeygenTokenState {
 public:
  enum class Phase { kResponded, kDone, kAborted };

  // Step 2: one exponentiation, V' = g^v'.
  static std::pair<KeygenTokenState, Point> respond(const Bytes32& commitment,
                                                    RandomSource& rng) {
    return respond_with_entropy(commitment, Scalar::random(rng));
  }

  // Explicit-entropy form; lets a (possibly adversarial) caller pick v'.
  static std::pair<KeygenTokenState, Point> respond_with_entropy(
      const Bytes32& commitment, Scalar v_prime) {
    KeygenTokenState st;
    st.v_prime_ = std::move(v_prime);
    st.commitment_ = commitment;
    st.phase_ = Phase::kResponded;
    Point v_point = Point::mul_generator(st.v_prime_);
    return {std::move(st), std::move(v_point)};
  }

  // Step 4: check the opening; on success x = v + v'.
  struct FinishResult {
    std::optional<Scalar> secret;  // set iff the opening verified
    KeygenError error = KeygenError::kCommitMismatch;
  };
  FinishResult finish(const KeygenOpening& opening) {
    FinishResult out;
    if (phase_ != Phase::kResponded) {
      out.error = KeygenError::kOrderViolation;
      return out;
    }
    if (keygen_commitment(opening.v, opening.r) != commitment_) {
      phase_ = Phase::kAborted;
      out.error = KeygenError::kCommitMismatch;
      return out;
    }
    phase_ = Phase::kDone;
    out.secret = opening.v.add(v_prime_);
    return out;
  }

  Phase phase() const { return phase_; }
  const Scalar& v_prime() const { return v_prime_; }

 private:
  Phase phase_ = Phase::kAborted;
  Scalar v_prime_;
  Bytes32 commitment_{};
};

// Browser strategy under simulation: emits a commitment, then opens against a
// given second message. The simulator rewinds, so open() runs twice against
// the same inner state.
class BrowserStrategy {
 public:
  virtual ~BrowserStrategy() = default;
  virtual Bytes32 strategy_commit() = 0;
  virtual KeygenOpening strategy_open(const Point& v_prime) = 0;
};

class HonestBrowserStrategy final : public BrowserStrategy {
 public:
  explicit HonestBrowserStrategy(RandomSource& rng)
      : v_(Scalar::random(rng)), r_(Scalar::random(rng)) {}

  Bytes32 strategy_commit() override { return keygen_commitment(v_, r_); }
  KeygenOpening strategy_open(const Point&) override {
    return KeygenOpening{v_, r_};
  }

  Point expected_public_key(const Point& v_prime) const {
    return v_prime.add(Point::mul_generator(v_));
  }

 private:
  Scalar v_, r_;
};

struct SimulatedTranscript {
  Bytes32 commitment;
  Point v_prime;         // X / g^v
  KeygenOpening opening; // (v, r*)
};

enum class SimulatorError {
  kInapplicable,  // the strategy would make a real token output bot
  kAbort,         // rewound opening changed v (binding break; never observed)
};

// Zero-knowledge simulator for never-aborting browser strategies: feed the
// strategy a random group element, learn v, rewind, and feed it V' = X / g^v
// so the transcript satisfies X = V' * g^v without knowing log_g(X).
inline std::optional<SimulatedTranscript> simulate_browser_view(
    const Point& x, BrowserStrategy& strategy, RandomSource& rng,
    SimulatorError* error = nullptr) {
  auto fail = [&](SimulatorError e) -> std::optional<SimulatedTranscript> {
    if (error != nullptr) *error = e;
    return std::nullopt;
  };
  Bytes32 c = strategy.strategy_commit();

  Point probe = Point::mul_generator(Scalar::random(rng));
  KeygenOpening first = strategy.strategy_open(probe);
  if (keygen_commitment(first.v, first.r) != c) {
    return fail(SimulatorError::kInapplicable);
  }

  Point v_prime = x.add(Point::mul_generator(first.v).inverse());
  KeygenOpening second = strategy.strategy_open(v_prime);
  if (keygen_commitment(second.v, second.r) != c) {
    return fail(SimulatorError::kInapplicable);
  }
  if (second.v != first.v) return fail(SimulatorError::kAbort);

  return SimulatedTranscript{c, v_prime, KeygenOpening{first.v, second.r}};
}

}  // namespace true2f

#endif  // TRUE2F_KEYGEN_HPP_

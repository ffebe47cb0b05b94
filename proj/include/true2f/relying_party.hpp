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

#ifndef TRUE2F_RELYING_PARTY_HPP_
#define TRUE2F_RELYING_PARTY_HPP_

#include <optional>
#include <string>
#include <vector>

#include "true2f/wire.hpp"
#include "true2f/rng.hpp"

// Relying-party simulator: registers key handles, issues challenges, verifies
// raw U2F responses and tracks per-account counters. A counter that fails to
// increase flags the account as possibly cloned. Attestation containers are
// accepted without chain validation (self-signed per-registration
// certificates carry no verifiable provenance anyway).

namespace true2f {

class RelyingParty {
 public:
  RelyingParty(std::string app_id, RandomSource& rng)
      : app_id_(std::move(app_id)), rng_(&rng) {}

  const std::string& app_id() const { return app_id_; }

  Bytes32 new_challenge() { return rng_->bytes32(); }

  struct AccountRecord {
    Bytes32 key_handle{};
    Point public_key;
    uint64_t last_counter = 0;
    bool has_authenticated = false;
    bool clone_flag = false;
  };

  // Accepts a well-formed registration response and opens an account for it.
  // Re-registration creates an independent account.
  std::optional<size_t> register_account(std::span<const uint8_t> response) {
    auto parsed = wire::decode_registration_response(response);
    if (!parsed) return std::nullopt;
    AccountRecord record;
    record.key_handle = parsed->key_handle;
    record.public_key = parsed->user_public_key;
    accounts_.push_back(record);
    return accounts_.size() - 1;
  }

  enum class AuthOutcome { kAccept, kRejectSig, kRejectCounter, kMalformed };

  AuthOutcome authenticate(size_t account, std::span<const uint8_t> response,
                           const Bytes32& challenge) {
    if (account >= accounts_.size()) return AuthOutcome::kMalformed;
    auto parsed = wire::decode_authentication_response(response);
    if (!parsed) return AuthOutcome::kMalformed;
    AccountRecord& record = accounts_[account];

    Bytes m = wire::build_signed_message(
        parsed->user_presence, sha256(as_span(app_id_)), challenge,
        record.key_handle, parsed->counter);
    if (!ecdsa_verify(record.public_key, m, parsed->signature)) {
      return AuthOutcome::kRejectSig;
    }
    observed_counters_.push_back(parsed->counter);
    if (record.has_authenticated && parsed->counter <= record.last_counter) {
      record.clone_flag = true;
      return AuthOutcome::kRejectCounter;
    }
    record.last_counter = parsed->counter;
    record.has_authenticated = true;
    return AuthOutcome::kAccept;
  }

  const AccountRecord& account(size_t i) const { return accounts_.at(i); }
  size_t account_count() const { return accounts_.size(); }

  // Restores a persisted account verbatim (state files, not wire input).
  size_t add_account(const AccountRecord& record) {
    accounts_.push_back(record);
    return accounts_.size() - 1;
  }

  std::optional<size_t> find_account(const Bytes32& key_handle) const {
    for (size_t i = 0; i < accounts_.size(); i++) {
      if (accounts_[i].key_handle == key_handle) return i;
    }
    return std::nullopt;
  }
  bool any_clone_flag() const {
    for (const auto& a : accounts_) {
      if (a.clone_flag) return true;
    }
    return false;
  }

  // Counter values this origin observed with valid signatures, in order.
  const std::vector<uint64_t>& observed_counters() const {
    return observed_counters_;
  }

 private:
  std::string app_id_;
  RandomSource* rng_;
  std::vector<AccountRecord> accounts_;
  std::vector<uint64_t> observed_counters_;
};

// --- cross-site fingerprinting probe ---

struct CounterObservation {
  size_t site;       // which colluding relying party saw it
  uint64_t counter;  // the counter value it saw
};

// Linkage heuristic for a coalition of relying parties: over the merged,
// time-ordered observation stream, the fraction of consecutive-observation
// windows (c, c+1, c+2) spanning at least two sites. A single global counter
// makes every window consecutive; independent per-identity counters leave
// only coincidences. Returns nullopt without at least two sites' traffic
// (no signal).
inline std::optional<double> fingerprint_probe(
    std::span<const CounterObservation> merged) {
  bool multi_site = false;
  for (size_t i = 1; i < merged.size(); i++) {
    if (merged[i].site != merged[0].site) multi_site = true;
  }
  if (!multi_site || merged.size() < 3) return std::nullopt;

  size_t windows = 0;
  size_t hits = 0;
  for (size_t i = 0; i + 2 < merged.size(); i++) {
    const auto& a = merged[i];
    const auto& b = merged[i + 1];
    const auto& c = merged[i + 2];
    bool cross_site = !(a.site == b.site && b.site == c.site);
    if (!cross_site) continue;
    windows++;
    if (b.counter == a.counter + 1 && c.counter == b.counter + 1) hits++;
  }
  if (windows == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(windows);
}

}  // namespace true2f

#endif  // TRUE2F_RELYING_PARTY_HPP_

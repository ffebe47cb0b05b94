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

#ifndef TRUE2F_HARNESS_HPP_
#define TRUE2F_HARNESS_HPP_

#include <cmath>
#include <memory>
#include <string>

#include <json.hpp>

#include "true2f/browser.hpp"
#include "true2f/relying_party.hpp"
#include "true2f/token.hpp"

// Scenario engine: drives real token/browser/relying-party instances through
// honest and adversarial scripts, with instrumentation (per-endpoint
// exponentiation counts, channel byte logs, abort counters) and a channel
// audit that flags any byte the token sends outside the audited protocol
// fields. Every run is a pure function of (scenario, seed); reports serialize
// to canonical JSON and are reproducible byte for byte.

namespace true2f {
namespace harness {

using Json = nlohmann::ordered_json;

// --- adversarial token variants ---

enum class TokenVariant {
  kHonest,
  kFixedNonce,      // ignores the joint nonce and signs with a constant
  kWrongNonce,      // signs with joint + 1: fresh each time but never right
  kBiasedKeygen,    // contributes constant entropy to key generation
  kWrongPk,         // registers X^(y+1) instead of X^y
  kCounterDesync,   // one extra silent counter increment on the first auth
  kGlobalCounter,   // straw-man single global counter (privacy baseline)
  kSelectiveAbort,  // refuses one chosen interaction
};

inline const char* to_string(TokenVariant v) {
  switch (v) {
    case TokenVariant::kHonest: return "honest";
    case TokenVariant::kFixedNonce: return "fixed-nonce";
    case TokenVariant::kWrongNonce: return "wrong-nonce";
    case TokenVariant::kBiasedKeygen: return "biased-keygen";
    case TokenVariant::kWrongPk: return "wrong-pk";
    case TokenVariant::kCounterDesync: return "counter-desync";
    case TokenVariant::kGlobalCounter: return "global-counter";
    case TokenVariant::kSelectiveAbort: return "selective-abort";
  }
  return "?";
}

inline std::optional<TokenVariant> variant_from_string(const std::string& s) {
  for (TokenVariant v :
       {TokenVariant::kHonest, TokenVariant::kFixedNonce,
        TokenVariant::kWrongNonce, TokenVariant::kBiasedKeygen,
        TokenVariant::kWrongPk, TokenVariant::kCounterDesync,
        TokenVariant::kGlobalCounter, TokenVariant::kSelectiveAbort}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

class FixedNonceToken final : public Token {
 public:
  using Token::Token;

 protected:
  Scalar signing_nonce(const Scalar&) override {
    return Scalar::from_u64(0x5eed);
  }
};

class WrongNonceToken final : public Token {
 public:
  using Token::Token;

 protected:
  Scalar signing_nonce(const Scalar& joint) override {
    return joint.add(Scalar::from_u64(1));
  }
};

class BiasedKeygenToken final : public Token {
 public:
  using Token::Token;

 protected:
  Scalar keygen_entropy() override { return Scalar::from_u64(1); }
};

class WrongPkToken final : public Token {
 public:
  using Token::Token;

 protected:
  Point registered_public_key(const VifIdentityKey& key) override {
    return Point::mul_generator(x_.mul(key.y.add(Scalar::from_u64(1))));
  }
};

class CounterDesyncToken final : public Token {
 public:
  using Token::Token;

 protected:
  std::optional<uint64_t> auth_counter(std::span<const uint8_t> id) override {
    if (!desynced_) {
      desynced_ = true;
      counter_->inc(id);  // the silent extra increment
    }
    return counter_->inc(id);
  }

 private:
  bool desynced_ = false;
};

class GlobalCounterToken final : public Token {
 public:
  using Token::Token;

  std::unique_ptr<Token> clone() const override {
    return std::make_unique<GlobalCounterToken>(*this);
  }

 protected:
  std::optional<uint64_t> auth_counter(std::span<const uint8_t>) override {
    return ++global_;
  }

 private:
  uint64_t global_ = 0;
};

class SelectiveAbortToken final : public Token {
 public:
  SelectiveAbortToken(RandomSource& rng, size_t abort_at_request)
      : Token(rng), abort_at_(abort_at_request) {}

 protected:
  bool intercept(const wire::Frame& frame, Channel& channel) override {
    if (frame.type != wire::FrameType::kRegisterRequest &&
        frame.type != wire::FrameType::kAuthRequest) {
      return false;
    }
    requests_seen_++;
    if (requests_seen_ == abort_at_) {
      channel.send_to_browser(wire::make_error(wire::ErrorCode::kBadState));
      return true;
    }
    return false;
  }

 private:
  size_t abort_at_;
  size_t requests_seen_ = 0;
};

inline std::unique_ptr<Token> make_token(TokenVariant variant,
                                         RandomSource& rng,
                                         size_t abort_at = 0) {
  switch (variant) {
    case TokenVariant::kHonest:
      return std::make_unique<Token>(rng);
    case TokenVariant::kFixedNonce:
      return std::make_unique<FixedNonceToken>(rng);
    case TokenVariant::kWrongNonce:
      return std::make_unique<WrongNonceToken>(rng);
    case TokenVariant::kBiasedKeygen:
      return std::make_unique<BiasedKeygenToken>(rng);
    case TokenVariant::kWrongPk:
      return std::make_unique<WrongPkToken>(rng);
    case TokenVariant::kCounterDesync:
      return std::make_unique<CounterDesyncToken>(rng);
    case TokenVariant::kGlobalCounter:
      return std::make_unique<GlobalCounterToken>(rng);
    case TokenVariant::kSelectiveAbort:
      return std::make_unique<SelectiveAbortToken>(rng, abort_at);
  }
  throw InternalError("unknown token variant");
}

// --- scenarios ---

struct Request {
  enum class Kind { kRegister, kAuth };
  Kind kind;
  size_t origin = 0;
  size_t identity = 0;  // index into the per-origin registration list
};

struct Scenario {
  std::string name;
  TokenVariant variant = TokenVariant::kHonest;
  size_t origins = 1;
  std::vector<Request> script;
  size_t abort_at = 0;               // selective-abort request index (1-based)
  bool browser_global_counter = false;
  std::string expectation;           // human-readable expected outcome
};

// A register at each origin, then interleaved authentications.
inline Scenario honest_scenario(size_t origins, size_t auths,
                                uint64_t interleave_seed = 1) {
  Scenario s;
  s.name = "honest";
  s.origins = origins;
  s.expectation = "all requests accepted, zero aborts";
  for (size_t o = 0; o < origins; o++) {
    s.script.push_back(Request{Request::Kind::kRegister, o, 0});
  }
  SeededRandom rng(interleave_seed);
  for (size_t i = 0; i < auths; i++) {
    s.script.push_back(
        Request{Request::Kind::kAuth, rng.u64() % origins, 0});
  }
  return s;
}

struct RequestOutcome {
  std::string kind;
  size_t origin = 0;
  std::string result;          // accept | reject-sig | reject-counter |
                               // bot:<reason> | short-circuit | malformed
  uint64_t counter = 0;        // counter value shown to the relying party
  uint64_t token_exps = 0;     // token-side exponentiations for this request
};

struct ScenarioReport {
  std::string scenario;
  std::string variant;
  uint64_t seed = 0;
  size_t requests = 0;
  size_t accepts = 0;
  size_t rejects = 0;
  size_t bots = 0;
  size_t short_circuited = 0;
  uint64_t init_token_exps = 0;
  uint64_t channel_bytes_to_token = 0;
  uint64_t channel_bytes_to_browser = 0;
  double abort_leak_bits = 0.0;  // log2(T+1) over T scripted interactions
  std::vector<RequestOutcome> outcomes;
  std::vector<std::string> taint_findings;
  std::vector<std::vector<uint64_t>> counter_traces;  // per origin
  std::string expectation;

  Json to_json() const {
    Json j;
    j["scenario"] = scenario;
    j["variant"] = variant;
    j["seed"] = seed;
    j["expectation"] = expectation;
    j["requests"] = requests;
    j["accepts"] = accepts;
    j["rejects"] = rejects;
    j["bots"] = bots;
    j["short_circuited"] = short_circuited;
    j["init_token_exponentiations"] = init_token_exps;
    j["channel_bytes_to_token"] = channel_bytes_to_token;
    j["channel_bytes_to_browser"] = channel_bytes_to_browser;
    j["abort_leak_bits"] = abort_leak_bits;
    j["taint_findings"] = taint_findings;
    Json outs = Json::array();
    for (const auto& o : outcomes) {
      Json jo;
      jo["kind"] = o.kind;
      jo["origin"] = o.origin;
      jo["result"] = o.result;
      jo["counter"] = o.counter;
      jo["token_exponentiations"] = o.token_exps;
      outs.push_back(jo);
    }
    j["outcomes"] = outs;
    j["counter_traces"] = counter_traces;
    return j;
  }
};

// --- channel audit (exfiltration taint check) ---
//
// Re-parses both channel logs. Every frame must decode, re-encode to the
// identical bytes (no residue), follow the conversation grammar, and carry
// only audited fields. Register responses are re-verified against the master
// public key; signature frames are re-verified against the registered
// per-identity key and the browser-side message.

struct AuditContext {
  VifMasterPublicKey mpk;
  bool have_mpk = false;
  // Expected message and key per signature, keyed by order of auth requests.
  std::vector<std::pair<Point, Bytes>> expected_signatures;
  std::vector<Bytes32> register_ids;
};

inline std::vector<std::string> audit_channel(const Channel& channel,
                                              const AuditContext& ctx) {
  std::vector<std::string> findings;
  auto flag = [&](const std::string& what) { findings.push_back(what); };

  size_t auth_index = 0;
  size_t register_index = 0;
  size_t to_token_auth = 0;
  size_t to_token_register = 0;
  for (const Bytes& raw : channel.log_to_token()) {
    auto f = wire::decode_frame(raw);
    if (!f) {
      flag("undecodable frame to token");
      continue;
    }
    if (wire::encode_frame(*f) != raw) flag("non-canonical frame to token");
    if (f->type == wire::FrameType::kRegisterRequest) {
      auto req = wire::parse_register_request(*f);
      if (!req) {
        flag("malformed register request");
      } else if (to_token_register < ctx.register_ids.size() &&
                 req->id != ctx.register_ids[to_token_register]) {
        flag("register request id is not the browser-sampled handle");
      }
      to_token_register++;
    }
    if (f->type == wire::FrameType::kAuthRequest) {
      auto req = wire::parse_auth_request(*f);
      if (!req) {
        flag("malformed auth request");
      } else if (to_token_auth < ctx.expected_signatures.size()) {
        // The request fields must be exactly the ones embedded in the
        // browser's message m' = presence || app || chal || id || counter.
        const Bytes& m = ctx.expected_signatures[to_token_auth].second;
        bool match =
            m.size() == 105 && req->presence == m[0] &&
            std::equal(req->app_hash.begin(), req->app_hash.end(),
                       m.begin() + 1) &&
            std::equal(req->challenge.begin(), req->challenge.end(),
                       m.begin() + 33) &&
            std::equal(req->id.begin(), req->id.end(), m.begin() + 65);
        if (!match) flag("auth request carries bytes beyond the m' fields");
      }
      to_token_auth++;
    }
  }
  for (const Bytes& raw : channel.log_to_browser()) {
    auto f = wire::decode_frame(raw);
    if (!f) {
      flag("undecodable frame to browser");
      continue;
    }
    if (wire::encode_frame(*f) != raw) flag("non-canonical frame to browser");
    switch (f->type) {
      case wire::FrameType::kInitPoint:
      case wire::FrameType::kSignPoint: {
        if (!wire::parse_point_frame(*f)) flag("malformed point frame");
        break;
      }
      case wire::FrameType::kInitDone:
        if (!f->payload.empty()) flag("init-done carries payload");
        break;
      case wire::FrameType::kRegisterResponse: {
        auto resp = wire::parse_register_response(*f);
        if (!resp) {
          flag("malformed register response");
          break;
        }
        if (ctx.have_mpk && register_index < ctx.register_ids.size()) {
          if (!vif_verify(ctx.mpk, ctx.register_ids[register_index],
                          resp->pk_id, resp->proof)) {
            flag("register response fails identity-family verification");
          }
        }
        register_index++;
        break;
      }
      case wire::FrameType::kSignSignature: {
        auto sig = wire::parse_signature_frame(*f);
        if (!sig) {
          flag("malformed signature frame");
          break;
        }
        if (auth_index < ctx.expected_signatures.size()) {
          const auto& [pk, m] = ctx.expected_signatures[auth_index];
          if (!ecdsa_verify(pk, m, *sig)) {
            flag("protocol signature fails verification against browser m'");
          }
        }
        auth_index++;
        break;
      }
      case wire::FrameType::kSignRestart:
      case wire::FrameType::kError:
        break;
      default:
        flag("unexpected frame type toward browser");
        break;
    }
  }
  return findings;
}

// --- scenario execution ---

inline ScenarioReport run_scenario(const Scenario& scenario, uint64_t seed) {
  SeededRandom root(seed);
  SeededRandom token_rng = root.fork("token");
  SeededRandom browser_rng = root.fork("browser");
  SeededRandom rp_rng = root.fork("rp");

  auto token = make_token(scenario.variant, token_rng, scenario.abort_at);
  Browser browser(browser_rng);
  if (scenario.browser_global_counter) browser.set_global_counter_mode(true);
  Channel channel;

  ScenarioReport report;
  report.scenario = scenario.name;
  report.variant = to_string(scenario.variant);
  report.seed = seed;
  report.expectation = scenario.expectation;
  report.counter_traces.resize(scenario.origins);

  std::vector<RelyingParty> rps;
  rps.reserve(scenario.origins);
  for (size_t o = 0; o < scenario.origins; o++) {
    rps.emplace_back("https://origin" + std::to_string(o) + ".example", rp_rng);
  }

  uint64_t exps_before_init = token->exponentiations();
  bool init_ok = browser.initialize(*token, channel);
  report.init_token_exps = token->exponentiations() - exps_before_init;

  AuditContext audit_ctx;
  if (init_ok) {
    audit_ctx.mpk = browser.mpk();
    audit_ctx.have_mpk = true;
  }

  // Per-origin registered identities and their relying-party accounts.
  std::vector<std::vector<std::pair<Bytes32, size_t>>> identities(
      scenario.origins);

  for (const Request& req : scenario.script) {
    report.requests++;
    RequestOutcome outcome;
    outcome.origin = req.origin;
    RelyingParty& rp = rps[req.origin];
    uint64_t exps_before = token->exponentiations();

    if (req.kind == Request::Kind::kRegister) {
      outcome.kind = "register";
      Bytes32 challenge = rp.new_challenge();
      BrowserError err = BrowserError::kNone;
      auto reg = browser.register_identity(*token, channel, rp.app_id(),
                                           challenge, &err);
      if (!reg) {
        report.bots += (err == BrowserError::kTokenFailure) ? 1 : 0;
        report.short_circuited += (err == BrowserError::kTokenDisabled) ? 1 : 0;
        outcome.result = err == BrowserError::kTokenDisabled
                             ? "short-circuit"
                             : std::string("bot:") + to_string(err);
      } else {
        audit_ctx.register_ids.push_back(reg->id);
        auto account = rp.register_account(reg->wire_response);
        if (!account) {
          outcome.result = "malformed";
        } else {
          identities[req.origin].push_back({reg->id, *account});
          outcome.result = "accept";
          report.accepts++;
        }
      }
    } else {
      outcome.kind = "auth";
      if (req.identity >= identities[req.origin].size()) {
        outcome.result = "no-identity";
        report.outcomes.push_back(outcome);
        continue;
      }
      auto [id, account] = identities[req.origin][req.identity];
      Bytes32 challenge = rp.new_challenge();
      BrowserError err = BrowserError::kNone;
      auto auth = browser.authenticate(*token, channel, rp.app_id(), challenge,
                                       id, true, &err);
      if (!auth) {
        report.bots += (err == BrowserError::kTokenFailure) ? 1 : 0;
        report.short_circuited += (err == BrowserError::kTokenDisabled) ? 1 : 0;
        outcome.result = err == BrowserError::kTokenDisabled
                             ? "short-circuit"
                             : std::string("bot:") + to_string(err);
      } else {
        audit_ctx.expected_signatures.push_back(
            {*browser.registered_key(rp.app_id(), id),
             wire::build_signed_message(auth->presence,
                                        Browser::app_hash(rp.app_id()),
                                        challenge, id, auth->counter)});
        outcome.counter = auth->counter;
        auto rp_outcome = rp.authenticate(account, auth->wire_response,
                                          challenge);
        switch (rp_outcome) {
          case RelyingParty::AuthOutcome::kAccept:
            outcome.result = "accept";
            report.accepts++;
            report.counter_traces[req.origin].push_back(auth->counter);
            break;
          case RelyingParty::AuthOutcome::kRejectSig:
            outcome.result = "reject-sig";
            report.rejects++;
            break;
          case RelyingParty::AuthOutcome::kRejectCounter:
            outcome.result = "reject-counter";
            report.rejects++;
            break;
          case RelyingParty::AuthOutcome::kMalformed:
            outcome.result = "malformed";
            report.rejects++;
            break;
        }
      }
    }
    outcome.token_exps = token->exponentiations() - exps_before;
    report.outcomes.push_back(outcome);
  }

  report.channel_bytes_to_token = channel.bytes_to_token();
  report.channel_bytes_to_browser = channel.bytes_to_browser();
  report.abort_leak_bits =
      std::log2(static_cast<double>(scenario.script.size()) + 1.0);
  report.taint_findings = audit_channel(channel, audit_ctx);
  return report;
}

// --- clone scenario (counter privacy) ---

struct CloneReport {
  bool clone_detected_site1 = false;
  bool clone_detected_site2 = false;
  std::vector<std::string> outcomes;

  Json to_json() const {
    Json j;
    j["clone_detected_site1"] = clone_detected_site1;
    j["clone_detected_site2"] = clone_detected_site2;
    j["outcomes"] = outcomes;
    return j;
  }
};

// The interleave: clone at S1, owner at S2, clone at S2, owner at S1. With a
// global counter both sites see an increasing sequence and neither flags;
// per-identity counters repeat at both sites and both flag.
inline CloneReport run_clone_scenario(bool global_counter, uint64_t seed) {
  SeededRandom root(seed);
  SeededRandom token_rng = root.fork("token");
  SeededRandom browser_rng = root.fork("browser");
  SeededRandom rp_rng = root.fork("rp");

  auto token = make_token(global_counter ? TokenVariant::kGlobalCounter
                                         : TokenVariant::kHonest,
                          token_rng);
  Browser browser(browser_rng);
  browser.set_global_counter_mode(global_counter);
  Channel channel;
  if (!browser.initialize(*token, channel)) {
    throw InternalError("clone scenario init failed");
  }

  RelyingParty s1("https://s1.example", rp_rng);
  RelyingParty s2("https://s2.example", rp_rng);
  auto reg1 = browser.register_identity(*token, channel, s1.app_id(),
                                        s1.new_challenge());
  auto reg2 = browser.register_identity(*token, channel, s2.app_id(),
                                        s2.new_challenge());
  if (!reg1 || !reg2) throw InternalError("clone scenario registration failed");
  size_t a1 = *s1.register_account(reg1->wire_response);
  size_t a2 = *s2.register_account(reg2->wire_response);

  // Physical clone of token and browser state.
  auto cloned_token = token->clone();
  Browser cloned_browser(browser);

  CloneReport report;
  auto do_auth = [&](Browser& b, Token& t, RelyingParty& rp, size_t account,
                     const Bytes32& id, const char* who) {
    Bytes32 challenge = rp.new_challenge();
    auto auth = b.authenticate(t, channel, rp.app_id(), challenge, id, true);
    std::string result;
    if (!auth) {
      result = "bot";
    } else {
      switch (rp.authenticate(account, auth->wire_response, challenge)) {
        case RelyingParty::AuthOutcome::kAccept: result = "accept"; break;
        case RelyingParty::AuthOutcome::kRejectSig: result = "reject-sig"; break;
        case RelyingParty::AuthOutcome::kRejectCounter:
          result = "reject-counter";
          break;
        case RelyingParty::AuthOutcome::kMalformed: result = "malformed"; break;
      }
    }
    report.outcomes.push_back(std::string(who) + "@" + rp.app_id() + ": " +
                              result);
  };

  do_auth(cloned_browser, *cloned_token, s1, a1, reg1->id, "clone");
  do_auth(browser, *token, s2, a2, reg2->id, "owner");
  do_auth(cloned_browser, *cloned_token, s2, a2, reg2->id, "clone");
  do_auth(browser, *token, s1, a1, reg1->id, "owner");

  report.clone_detected_site1 = s1.any_clone_flag();
  report.clone_detected_site2 = s2.any_clone_flag();
  return report;
}

// --- fingerprinting scenario (counter linkage) ---

struct FingerprintReport {
  double linkage_rate = 0.0;
  double baseline_rate = 0.0;  // the same interleave on independent tokens
  size_t auths = 0;

  Json to_json() const {
    Json j;
    j["linkage_rate"] = linkage_rate;
    j["baseline_rate"] = baseline_rate;
    j["auths"] = auths;
    return j;
  }
};

// Two colluding origins observe an interleaved authentication stream from one
// token; the baseline runs the identical interleave against two independent
// tokens. Returns the consecutive-counter linkage rate for both worlds.
inline FingerprintReport run_fingerprint_scenario(bool global_counter,
                                                  size_t auths,
                                                  uint64_t seed) {
  SeededRandom interleave(seed + 17);
  std::vector<size_t> pattern;
  for (size_t i = 0; i < auths; i++) pattern.push_back(interleave.u64() % 2);

  auto run_single_token = [&](bool global) -> std::vector<CounterObservation> {
    SeededRandom root(seed);
    SeededRandom token_rng = root.fork("token");
    SeededRandom browser_rng = root.fork("browser");
    SeededRandom rp_rng = root.fork("rp");
    auto token = make_token(global ? TokenVariant::kGlobalCounter
                                   : TokenVariant::kHonest,
                            token_rng);
    Browser browser(browser_rng);
    browser.set_global_counter_mode(global);
    Channel channel;
    if (!browser.initialize(*token, channel)) {
      throw InternalError("fingerprint scenario init failed");
    }
    RelyingParty rps[2] = {RelyingParty("https://f0.example", rp_rng),
                           RelyingParty("https://f1.example", rp_rng)};
    Bytes32 ids[2];
    size_t accounts[2];
    for (int s = 0; s < 2; s++) {
      auto reg = browser.register_identity(*token, channel, rps[s].app_id(),
                                           rps[s].new_challenge());
      if (!reg) throw InternalError("fingerprint registration failed");
      ids[s] = reg->id;
      accounts[s] = *rps[s].register_account(reg->wire_response);
    }
    std::vector<CounterObservation> merged;
    for (size_t site : pattern) {
      Bytes32 challenge = rps[site].new_challenge();
      auto auth = browser.authenticate(*token, channel, rps[site].app_id(),
                                       challenge, ids[site], true);
      if (!auth) throw InternalError("fingerprint auth failed");
      if (rps[site].authenticate(accounts[site], auth->wire_response,
                                 challenge) !=
          RelyingParty::AuthOutcome::kAccept) {
        throw InternalError("fingerprint auth rejected");
      }
      merged.push_back(CounterObservation{site, auth->counter});
    }
    return merged;
  };

  // Baseline: one independent token per origin, same interleave.
  auto run_independent_tokens = [&]() -> std::vector<CounterObservation> {
    std::vector<CounterObservation> merged;
    struct World {
      std::unique_ptr<SeededRandom> token_rng, browser_rng, rp_rng;
      std::unique_ptr<Token> token;
      std::unique_ptr<Browser> browser;
      std::unique_ptr<RelyingParty> rp;
      Channel channel;
      Bytes32 id;
      size_t account = 0;
    };
    World worlds[2];
    for (int s = 0; s < 2; s++) {
      SeededRandom root(seed + 1000 + s);
      worlds[s].token_rng =
          std::make_unique<SeededRandom>(root.fork("token"));
      worlds[s].browser_rng =
          std::make_unique<SeededRandom>(root.fork("browser"));
      worlds[s].rp_rng = std::make_unique<SeededRandom>(root.fork("rp"));
      worlds[s].token = std::make_unique<Token>(*worlds[s].token_rng);
      worlds[s].browser = std::make_unique<Browser>(*worlds[s].browser_rng);
      if (!worlds[s].browser->initialize(*worlds[s].token,
                                         worlds[s].channel)) {
        throw InternalError("baseline init failed");
      }
      worlds[s].rp = std::make_unique<RelyingParty>(
          "https://f" + std::to_string(s) + ".example", *worlds[s].rp_rng);
      auto reg = worlds[s].browser->register_identity(
          *worlds[s].token, worlds[s].channel, worlds[s].rp->app_id(),
          worlds[s].rp->new_challenge());
      if (!reg) throw InternalError("baseline registration failed");
      worlds[s].id = reg->id;
      worlds[s].account = *worlds[s].rp->register_account(reg->wire_response);
    }
    for (size_t site : pattern) {
      World& w = worlds[site];
      Bytes32 challenge = w.rp->new_challenge();
      auto auth = w.browser->authenticate(*w.token, w.channel, w.rp->app_id(),
                                          challenge, w.id, true);
      if (!auth) throw InternalError("baseline auth failed");
      merged.push_back(CounterObservation{site, auth->counter});
    }
    return merged;
  };

  FingerprintReport report;
  report.auths = auths;
  auto linked = fingerprint_probe(run_single_token(global_counter));
  auto baseline = fingerprint_probe(run_independent_tokens());
  report.linkage_rate = linked.value_or(0.0);
  report.baseline_rate = baseline.value_or(0.0);
  return report;
}

// --- crash campaign ---

struct CrashCampaignReport {
  size_t trace_ops = 0;
  size_t crash_points = 0;
  size_t violations = 0;
  bool control_matches_oracle = false;

  Json to_json() const {
    Json j;
    j["trace_ops"] = trace_ops;
    j["crash_points"] = crash_points;
    j["violations"] = violations;
    j["control_matches_oracle"] = control_matches_oracle;
    return j;
  }
};

// Replays a counter trace with a crash injected at every flash mutation
// event (every word write and every erase), under both indeterminacy models.
// After each crash: recovery must succeed, every identity must read at least
// the last value returned for it, and one follow-up increment per identity
// must be strictly increasing. `stride` > 1 samples the crash points.
inline CrashCampaignReport run_crash_campaign(size_t trace_ops,
                                              size_t distinct_ids,
                                              uint64_t seed,
                                              size_t stride = 1) {
  CrashCampaignReport report;
  report.trace_ops = trace_ops;

  SeededRandom trace_rng(seed);
  std::vector<uint32_t> trace;
  for (size_t i = 0; i < trace_ops; i++) {
    trace.push_back(static_cast<uint32_t>(trace_rng.u64() % distinct_ids));
  }
  auto make_id = [](uint32_t n) {
    Bytes id;
    append(id, as_span(std::string("campaign-id-")));
    append_u32be(id, n);
    return id;
  };

  // Control run: no crashes, values must match an in-memory map exactly.
  uint64_t total_events = 0;
  {
    FlashSim flash(kCounterPages);
    CounterStore st = CounterStore::init(flash);
    std::map<uint32_t, uint64_t> oracle;
    bool ok = true;
    for (uint32_t which : trace) {
      auto got = st.inc(make_id(which));
      oracle[which]++;
      ok &= got.has_value() && *got == oracle[which];
    }
    report.control_matches_oracle = ok;
    total_events = flash.mutation_events();
  }

  for (CrashModel model : {CrashModel::kRandomBits, CrashModel::kAllZeros}) {
    for (uint64_t crash_at = 0; crash_at < total_events; crash_at += stride) {
      FlashSim flash(kCounterPages);
      std::map<uint32_t, uint64_t> returned;
      flash.arm_crash(crash_at, model, seed ^ (crash_at * 2654435761ull));
      bool crashed = false;
      try {
        CounterStore st = CounterStore::init(flash);
        for (uint32_t which : trace) {
          auto got = st.inc(make_id(which));
          if (!got) break;
          returned[which] = *got;
        }
      } catch (const CrashInterrupt&) {
        crashed = true;
      }
      if (!crashed) continue;
      flash.disarm_crash();
      report.crash_points++;

      try {
        CounterStore recovered = CounterStore::recover(flash);
        for (const auto& [which, last] : returned) {
          if (recovered.value(make_id(which)) < last) report.violations++;
        }
        for (const auto& [which, last] : returned) {
          auto next = recovered.inc(make_id(which));
          if (!next || *next <= last) report.violations++;
        }
      } catch (const std::exception&) {
        report.violations++;
      }
    }
  }
  return report;
}

}  // namespace harness
}  // namespace true2f

#endif  // TRUE2F_HARNESS_HPP_

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

#include "true2f/harness.hpp"

using namespace true2f;
using namespace true2f::harness;

TEST_CASE("honest scenario: all accepted, no aborts, clean audit") {
  Scenario s = honest_scenario(/*origins=*/3, /*auths=*/100);
  ScenarioReport report = run_scenario(s, 1234);
  CHECK(report.requests == 103);
  CHECK(report.accepts == 103);
  CHECK(report.bots == 0);
  CHECK(report.rejects == 0);
  CHECK(report.taint_findings.empty());
  CHECK(report.init_token_exps == 2);  // one per key-generation run

  for (const RequestOutcome& o : report.outcomes) {
    CHECK(o.result == "accept");
    if (o.kind == "auth") CHECK(o.token_exps == 2);
  }
}

TEST_CASE("fixed-nonce adversary: first auth aborts, rest short-circuit") {
  Scenario s = honest_scenario(1, 10);
  s.name = "fixed-nonce";
  s.variant = TokenVariant::kFixedNonce;
  ScenarioReport report = run_scenario(s, 77);
  // Registration is honest; the first authentication trips the firewall.
  REQUIRE(report.outcomes.size() == 11);
  CHECK(report.outcomes[0].result == "accept");
  CHECK(report.outcomes[1].result == "bot:token-failure");
  for (size_t i = 2; i < report.outcomes.size(); i++) {
    CHECK(report.outcomes[i].result == "short-circuit");
  }
  CHECK(report.bots == 1);
  CHECK(report.short_circuited == 9);
}

TEST_CASE("wrong-pk adversary: registration aborts immediately") {
  Scenario s = honest_scenario(1, 5);
  s.name = "wrong-pk";
  s.variant = TokenVariant::kWrongPk;
  ScenarioReport report = run_scenario(s, 78);
  CHECK(report.outcomes[0].result == "bot:token-failure");
  CHECK(report.bots == 1);
  CHECK(report.accepts == 0);
}

TEST_CASE("counter-desync adversary: firewall rejects the first signature") {
  Scenario s = honest_scenario(1, 6);
  s.name = "counter-desync";
  s.variant = TokenVariant::kCounterDesync;
  ScenarioReport report = run_scenario(s, 79);
  CHECK(report.outcomes[0].result == "accept");  // registration
  CHECK(report.outcomes[1].result == "bot:token-failure");
  CHECK(report.short_circuited == 5);
}

TEST_CASE("biased-keygen adversary cannot abort or taint the outputs") {
  Scenario s = honest_scenario(2, 40);
  s.name = "biased-keygen";
  s.variant = TokenVariant::kBiasedKeygen;
  ScenarioReport report = run_scenario(s, 80);
  CHECK(report.accepts == report.requests);
  CHECK(report.bots == 0);
  CHECK(report.taint_findings.empty());
}

TEST_CASE("selective abort: one refusal, everything after short-circuits") {
  Scenario s = honest_scenario(1, 6);  // 7 interactions total
  s.name = "selective-abort";
  s.variant = TokenVariant::kSelectiveAbort;
  s.abort_at = 4;
  ScenarioReport report = run_scenario(s, 81);
  REQUIRE(report.outcomes.size() == 7);
  CHECK(report.outcomes[3].result == "bot:token-failure");
  for (size_t i = 4; i < 7; i++) {
    CHECK(report.outcomes[i].result == "short-circuit");
  }
  CHECK(report.abort_leak_bits == Catch::Approx(3.0));  // log2(7 + 1)
}

TEST_CASE("clone detection: global counter misses, per-identity flags both") {
  CloneReport global = run_clone_scenario(/*global_counter=*/true, 90);
  CHECK_FALSE(global.clone_detected_site1);
  CHECK_FALSE(global.clone_detected_site2);
  for (const std::string& o : global.outcomes) {
    CHECK(o.find("accept") != std::string::npos);
  }

  CloneReport per_id = run_clone_scenario(/*global_counter=*/false, 90);
  CHECK(per_id.clone_detected_site1);
  CHECK(per_id.clone_detected_site2);
}

TEST_CASE("fingerprint probe: global counter links, per-identity does not") {
  FingerprintReport global = run_fingerprint_scenario(true, 200, 91);
  CHECK(global.linkage_rate > 0.95);

  FingerprintReport per_id = run_fingerprint_scenario(false, 200, 91);
  CHECK(std::abs(per_id.linkage_rate - per_id.baseline_rate) <= 0.05);
  CHECK(per_id.linkage_rate < 0.5);
}

TEST_CASE("crash campaign: sampled sweep has zero violations") {
  CrashCampaignReport report =
      run_crash_campaign(/*trace_ops=*/150, /*distinct_ids=*/25, 92,
                         /*stride=*/5);
  CHECK(report.control_matches_oracle);
  CHECK(report.crash_points > 50);
  CHECK(report.violations == 0);
}

TEST_CASE("reports are reproducible byte-for-byte from (scenario, seed)") {
  Scenario s = honest_scenario(2, 30);
  std::string a = run_scenario(s, 4242).to_json().dump();
  std::string b = run_scenario(s, 4242).to_json().dump();
  CHECK(a == b);
  std::string c = run_scenario(s, 4243).to_json().dump();
  CHECK(a != c);

  std::string d = run_crash_campaign(60, 10, 7, 9).to_json().dump();
  std::string e = run_crash_campaign(60, 10, 7, 9).to_json().dump();
  CHECK(d == e);
}

TEST_CASE("fingerprint probe needs at least two sites") {
  std::vector<CounterObservation> single = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  CHECK_FALSE(fingerprint_probe(single).has_value());
  CHECK_FALSE(fingerprint_probe({}).has_value());
}

TEST_CASE("audit flags non-protocol bytes") {
  Channel channel;
  channel.send_to_browser(wire::Frame{wire::FrameType::kInitDone,
                                      Bytes{0x01, 0x02}});  // payload residue
  AuditContext ctx;
  auto findings = audit_channel(channel, ctx);
  REQUIRE_FALSE(findings.empty());
}

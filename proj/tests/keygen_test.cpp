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

#include "true2f/keygen.hpp"

using namespace true2f;

TEST_CASE("commitment message is 32 bytes and distinct across runs") {
  SeededRandom rng(60);
  auto [st1, c1] = KeygenBrowserState::commit(rng);
  auto [st2, c2] = KeygenBrowserState::commit(rng);
  CHECK(c1.size() == 32);
  CHECK(c1 != c2);
  // c recomputes from the stored opening values.
  CHECK(keygen_commitment(st1.v(), st1.r()) == c1);
}

TEST_CASE("token response is a non-identity point made with one exponentiation") {
  SeededRandom rng(61);
  auto [bst, c] = KeygenBrowserState::commit(rng);
  uint64_t before = exp_count();
  auto [tst1, v_point1] = KeygenTokenState::respond(c, rng);
  CHECK(exp_count() == before + 1);
  CHECK_FALSE(v_point1.is_identity());

  auto [tst2, v_point2] = KeygenTokenState::respond(c, rng);
  CHECK(tst1.v_prime() != tst2.v_prime());
}

TEST_CASE("honest run: browser X equals g^(token x)") {
  SeededRandom rng(62);
  for (int i = 0; i < 1000; i++) {
    auto [bst, c] = KeygenBrowserState::commit(rng);
    auto [tst, v_point] = KeygenTokenState::respond(c, rng);
    auto open = bst.open(v_point);
    REQUIRE(open.has_value());
    auto finish = tst.finish(open->opening);
    REQUIRE(finish.secret.has_value());  // honest runs never abort
    REQUIRE(Point::mul_generator(*finish.secret) == open->public_key);
  }
}

TEST_CASE("browser open is single-shot") {
  SeededRandom rng(63);
  auto [bst, c] = KeygenBrowserState::commit(rng);
  auto [tst, v_point] = KeygenTokenState::respond(c, rng);
  auto first = bst.open(v_point);
  REQUIRE(first.has_value());
  CHECK_FALSE(bst.open(v_point).has_value());  // phase violation, not bot
}

TEST_CASE("browser output is a pure function of the transcript") {
  SeededRandom rng(64);
  auto [bst, c] = KeygenBrowserState::commit(rng);
  auto [tst, v_point] = KeygenTokenState::respond(c, rng);
  Point expected = v_point.add(Point::mul_generator(bst.v()));
  auto open = bst.open(v_point);
  REQUIRE(open.has_value());
  CHECK(open->public_key == expected);
}

TEST_CASE("tampered openings make the token output bot") {
  SeededRandom rng(65);
  auto [bst, c] = KeygenBrowserState::commit(rng);
  auto [tst, v_point] = KeygenTokenState::respond(c, rng);
  auto open = bst.open(v_point);
  REQUIRE(open.has_value());

  SECTION("v shifted") {
    KeygenOpening bad{open->opening.v.add(Scalar::from_u64(1)),
                      open->opening.r};
    auto finish = tst.finish(bad);
    CHECK_FALSE(finish.secret.has_value());
    CHECK(finish.error == KeygenError::kCommitMismatch);
  }
  SECTION("r shifted") {
    KeygenOpening bad{open->opening.v,
                      open->opening.r.add(Scalar::from_u64(1))};
    auto finish = tst.finish(bad);
    CHECK_FALSE(finish.secret.has_value());
    CHECK(finish.error == KeygenError::kCommitMismatch);
  }
  SECTION("out-of-order finish is a distinct error") {
    auto finish = tst.finish(open->opening);
    REQUIRE(finish.secret.has_value());
    auto again = tst.finish(open->opening);
    CHECK_FALSE(again.secret.has_value());
    CHECK(again.error == KeygenError::kOrderViolation);
  }
}

TEST_CASE("binding probe: random alternate openings are rejected") {
  SeededRandom rng(66);
  auto [bst, c] = KeygenBrowserState::commit(rng);
  for (int i = 0; i < 200; i++) {
    auto [tst, v_point] = KeygenTokenState::respond(c, rng);
    KeygenOpening alt{Scalar::random(rng), Scalar::random(rng)};
    if (alt.v == bst.v() && alt.r == bst.r()) continue;
    auto finish = tst.finish(alt);
    CHECK_FALSE(finish.secret.has_value());
    CHECK(finish.error == KeygenError::kCommitMismatch);
  }
}

TEST_CASE("browser output stays uniform against a zero-entropy token") {
  // Adversarial token that fixes V' = g^0: X = g^v must still be uniform.
  // Chi-square over 16 buckets of the serialized X; the threshold is the
  // p = 0.001 critical value for 15 degrees of freedom.
  SeededRandom rng(67);
  std::array<int, 16> buckets{};
  const int n = 1000;
  for (int i = 0; i < n; i++) {
    auto [bst, c] = KeygenBrowserState::commit(rng);
    Point v_point = Point::identity();
    auto open = bst.open(v_point);
    REQUIRE(open.has_value());
    auto enc = open->public_key.encode();
    buckets[enc[1] >> 4]++;
  }
  double expected = static_cast<double>(n) / 16.0;
  double chi2 = 0;
  for (int count : buckets) {
    double d = count - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 37.697);
}

TEST_CASE("simulator reproduces the honest browser's view") {
  SeededRandom rng(68);
  for (int i = 0; i < 20; i++) {
    // Target public key with unknown discrete log from the simulator's view.
    Point x = Point::mul_generator(Scalar::random(rng));
    HonestBrowserStrategy strategy(rng);
    auto transcript = simulate_browser_view(x, strategy, rng);
    REQUIRE(transcript.has_value());

    // The transcript satisfies X = V' * g^v, and V' = X / g^v exactly.
    Point recomputed =
        transcript->v_prime.add(Point::mul_generator(transcript->opening.v));
    CHECK(recomputed == x);
    Point v_prime_expected =
        x.add(Point::mul_generator(transcript->opening.v).inverse());
    CHECK(transcript->v_prime == v_prime_expected);

    // Commitment checks out, so a real token accepts this transcript.
    CHECK(keygen_commitment(transcript->opening.v, transcript->opening.r) ==
          transcript->commitment);

    // Message lengths match the real protocol: 32, 33, 64 bytes.
    CHECK(transcript->commitment.size() == 32);
    CHECK(transcript->v_prime.encode().size() == 33);
    CHECK(transcript->opening.to_bytes().size() == 64);
  }
}

TEST_CASE("simulator flags strategies that would abort a real token") {
  SeededRandom rng(69);
  // Strategy whose opening never matches its commitment.
  class BrokenStrategy final : public BrowserStrategy {
   public:
    explicit BrokenStrategy(RandomSource& rng)
        : v_(Scalar::random(rng)), r_(Scalar::random(rng)) {}
    Bytes32 strategy_commit() override { return Bytes32{}; }
    KeygenOpening strategy_open(const Point&) override {
      return KeygenOpening{v_, r_};
    }

   private:
    Scalar v_, r_;
  };

  Point x = Point::mul_generator(Scalar::random(rng));
  BrokenStrategy strategy(rng);
  SimulatorError err;
  CHECK_FALSE(simulate_browser_view(x, strategy, rng, &err).has_value());
  CHECK(err == SimulatorError::kInapplicable);
}

TEST_CASE("opening serialization round-trips") {
  SeededRandom rng(70);
  KeygenOpening opening{Scalar::random(rng), Scalar::random(rng)};
  auto back = KeygenOpening::from_bytes(opening.to_bytes());
  REQUIRE(back.has_value());
  CHECK(back->v == opening.v);
  CHECK(back->r == opening.r);
  CHECK_FALSE(KeygenOpening::from_bytes(Bytes(63, 0)).has_value());
}

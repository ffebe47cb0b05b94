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

#include "true2f/flash.hpp"

using namespace true2f;

TEST_CASE("erase sets all ones; writes only clear bits") {
  FlashSim flash(1);
  CHECK(flash.read(0, 0) == kErasedWord);
  flash.write(0, 0, 0xf0f0f0f0);
  CHECK(flash.read(0, 0) == 0xf0f0f0f0);
  // A second write cannot bring bits back to 1.
  flash.write(0, 0, 0xffff0000);
  CHECK(flash.read(0, 0) == 0xf0f00000);
  flash.erase(0);
  CHECK(flash.read(0, 0) == kErasedWord);
}

TEST_CASE("word write budget is enforced") {
  FlashSim flash(1);
  for (int i = 0; i < 8; i++) flash.write(0, 7, 0xffffffff);
  CHECK_THROWS_AS(flash.write(0, 7, 0), FlashViolation);
  flash.erase(0);  // erase resets the per-word budget
  flash.write(0, 7, 0);
}

TEST_CASE("page erase budget is enforced") {
  FlashConfig config;
  config.erase_budget = 3;
  FlashSim flash(1, config);
  for (int i = 0; i < 3; i++) flash.erase(0);
  CHECK(flash.erases_remaining(0) == 0);
  CHECK_THROWS_AS(flash.erase(0), FlashViolation);
}

TEST_CASE("out-of-range access is a violation") {
  FlashSim flash(2);
  CHECK_THROWS_AS(flash.read(2, 0), FlashViolation);
  CHECK_THROWS_AS(flash.write(0, kPageWords, 0), FlashViolation);
}

TEST_CASE("crash interrupts a write; only transitioning bits are affected") {
  SECTION("all-zeros model: the write completes for the modified bits") {
    FlashSim flash(1);
    flash.arm_crash(0, CrashModel::kAllZeros, 1);
    CHECK_THROWS_AS(flash.write(0, 3, 0x12345678), CrashInterrupt);
    CHECK(flash.read(0, 3) == 0x12345678);
    // After the crash fires, operation resumes normally.
    flash.write(0, 4, 0x0000ffff);
    CHECK(flash.read(0, 4) == 0x0000ffff);
  }
  SECTION("random model leaves transitioning bits in either state") {
    FlashSim flash(1);
    flash.write(0, 3, 0xffff00ff);  // clear the third byte first
    flash.arm_crash(0, CrashModel::kRandomBits, 42);
    CHECK_THROWS_AS(flash.write(0, 3, 0x0000ffff), CrashInterrupt);
    uint32_t after = flash.read(0, 3);
    // Untouched bits hold: the cleared byte stays cleared, the low half
    // (written with 1s) keeps its old value.
    CHECK((after & 0x0000ffff) == 0x000000ff);
    // Transitioning bits (the top half) are between old and new.
    CHECK((after & 0xffff0000) == (after & 0xffff0000 & 0xffff00ff));
  }
}

TEST_CASE("crash interrupts an erase; set bits hold, cleared bits float") {
  FlashSim flash(1);
  for (size_t w = 0; w < 16; w++) flash.write(0, w, 0);
  SECTION("all-zeros model: nothing rises") {
    flash.arm_crash(0, CrashModel::kAllZeros, 7);
    CHECK_THROWS_AS(flash.erase(0), CrashInterrupt);
    for (size_t w = 0; w < 16; w++) CHECK(flash.read(0, w) == 0);
    for (size_t w = 16; w < kPageWords; w++) {
      CHECK(flash.read(0, w) == kErasedWord);
    }
    // The interrupted erase still consumed a cycle and reset write budgets.
    CHECK(flash.erase_count(0) == 1);
    flash.write(0, 0, 0);
  }
  SECTION("random model: previously set bits never drop") {
    flash.arm_crash(0, CrashModel::kRandomBits, 9);
    CHECK_THROWS_AS(flash.erase(0), CrashInterrupt);
    for (size_t w = 16; w < kPageWords; w++) {
      CHECK(flash.read(0, w) == kErasedWord);
    }
  }
}

TEST_CASE("crash scheduling counts mutation events") {
  FlashSim flash(1);
  flash.write(0, 0, 1);
  flash.arm_crash(2, CrashModel::kAllZeros, 1);  // two more writes succeed
  flash.write(0, 1, 1);
  flash.write(0, 2, 1);
  CHECK_THROWS_AS(flash.write(0, 3, 1), CrashInterrupt);
  flash.disarm_crash();
}

TEST_CASE("three-page image serializes to 6144 bytes and round-trips") {
  FlashSim flash(3);
  flash.write(0, 0, 0xdeadbeef);
  flash.write(1, 511, 0x00c0ffee);
  flash.write(2, 100, 0);
  Bytes image = flash.serialize();
  CHECK(image.size() == 6144);

  auto restored = FlashSim::deserialize(image);
  REQUIRE(restored.has_value());
  CHECK(restored->read(0, 0) == 0xdeadbeef);
  CHECK(restored->read(1, 511) == 0x00c0ffee);
  CHECK(restored->read(2, 100) == 0);
  CHECK(restored->serialize() == image);

  CHECK_FALSE(FlashSim::deserialize(Bytes(100, 0)).has_value());
  CHECK_FALSE(FlashSim::deserialize(Bytes{}).has_value());
}

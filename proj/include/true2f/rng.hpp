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

#ifndef TRUE2F_RNG_HPP_
#define TRUE2F_RNG_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>

#include <openssl/rand.h>

#include "true2f/bytes.hpp"

namespace true2f {

class RandomnessError : public std::runtime_error {
 public:
  explicit RandomnessError(const std::string& what)
      : std::runtime_error(what) {}
};

// Randomness source injected into every randomized operation. Tests and the
// scenario engine supply a seeded source so whole runs replay byte-for-byte;
// OS randomness is used only outside of that.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<uint8_t> out) = 0;

  Bytes32 bytes32() {
    Bytes32 out;
    fill(out);
    return out;
  }

  Bytes bytes(size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }

  uint64_t u64() {
    std::array<uint8_t, 8> buf;
    fill(buf);
    return read_u64be(buf);
  }
};

class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<uint8_t> out) override {
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
      throw RandomnessError("system randomness unavailable");
    }
  }
};

// SHA-256 counter DRBG. Cheap, unrelated to any protocol hashing, and stable
// across platforms, which is all the replayable harness needs.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(uint64_t seed) {
    Bytes seed_bytes;
    append(seed_bytes, as_span(std::string("true2f-sim drbg seed")));
    append_u64be(seed_bytes, seed);
    key_ = sha256(seed_bytes);
  }

  explicit SeededRandom(const Bytes32& key) : key_(key) {}

  void fill(std::span<uint8_t> out) override {
    size_t off = 0;
    while (off < out.size()) {
      if (have_ == 0) refill();
      size_t n = std::min(out.size() - off, have_);
      std::memcpy(out.data() + off, block_.data() + (block_.size() - have_), n);
      have_ -= n;
      off += n;
    }
  }

  // Derives an independent child stream; used to give each endpoint in a
  // scenario its own replayable randomness.
  SeededRandom fork(const std::string& label) {
    Bytes input;
    append(input, key_);
    append(input, as_span(label));
    return SeededRandom(sha256(input));
  }

 private:
  void refill() {
    Bytes input;
    append(input, key_);
    append_u64be(input, counter_++);
    block_ = sha256(input);
    have_ = block_.size();
  }

  Bytes32 key_{};
  Bytes32 block_{};
  size_t have_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace true2f

#endif  // TRUE2F_RNG_HPP_

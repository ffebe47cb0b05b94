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

#ifndef TRUE2F_FLASH_HPP_
#define TRUE2F_FLASH_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "true2f/bytes.hpp"

// Simulated NOR flash: 2048-byte pages of 32-bit words. An erase sets every
// bit of a page to 1; a write can only clear bits (the stored word becomes
// old AND new). The simulator enforces the hardware constraints on every
// operation — page-granularity erases, at most eight writes per word between
// erases, a lifetime erase budget per page — and any violation throws, so a
// violation is a test failure rather than a warning.
//
// Crash injection: arming a crash makes the Nth mutation event (word write or
// page erase) from now stop partway. The bits the operation was modifying
// become indeterminate — each reads as a coin flip or as the new value, per
// the configured model — bits the operation was not touching keep their old
// state. CrashInterrupt is thrown; callers recover by rebuilding state from
// the flash image.

namespace true2f {

inline constexpr size_t kPageBytes = 2048;
inline constexpr size_t kPageWords = kPageBytes / 4;
inline constexpr uint32_t kErasedWord = 0xffffffffu;

class FlashViolation : public std::runtime_error {
 public:
  explicit FlashViolation(const std::string& what)
      : std::runtime_error("flash constraint violated: " + what) {}
};

struct CrashInterrupt {
  uint64_t event;
};

enum class CrashModel { kRandomBits, kAllZeros };

struct FlashConfig {
  int max_writes_per_word = 8;
  int erase_budget = 50000;  // program/erase cycles per page
};

class FlashSim {
 public:
  explicit FlashSim(size_t num_pages, FlashConfig config = {})
      : config_(config), pages_(num_pages) {}

  size_t num_pages() const { return pages_.size(); }
  const FlashConfig& config() const { return config_; }

  uint32_t read(size_t page, size_t word) const {
    check_addr(page, word);
    return pages_[page].words[word];
  }

  void write(size_t page, size_t word, uint32_t value) {
    check_addr(page, word);
    PageState& p = pages_[page];
    if (p.write_counts[word] >= config_.max_writes_per_word) {
      throw FlashViolation("write count exceeded for word");
    }
    p.write_counts[word]++;
    if (crash_due()) {
      // Bits being cleared (1 -> 0) are mid-transition: each reads old or
      // new. Bits the write leaves alone are untouched.
      uint32_t current = p.words[word];
      uint32_t transitioning = current & ~value;
      p.words[word] = (current & value) | (transitioning & noise());
      throw CrashInterrupt{events_};
    }
    p.words[word] &= value;  // writes only clear bits
  }

  void erase(size_t page) {
    check_addr(page, 0);
    PageState& p = pages_[page];
    if (p.erases >= config_.erase_budget) {
      throw FlashViolation("erase budget exceeded for page");
    }
    p.erases++;
    p.write_counts.fill(0);
    if (crash_due()) {
      // Bits being raised (0 -> 1) are mid-transition; bits already 1 hold.
      for (auto& w : p.words) w = w | (~w & noise());
      throw CrashInterrupt{events_};
    }
    p.words.fill(kErasedWord);
  }

  int erase_count(size_t page) const { return pages_.at(page).erases; }
  int erases_remaining(size_t page) const {
    return config_.erase_budget - pages_.at(page).erases;
  }
  int write_count(size_t page, size_t word) const {
    check_addr(page, word);
    return pages_[page].write_counts[word];
  }

  // --- crash injection ---

  // The crash fires on the events_from_now-th mutation counted from the next
  // one (0 interrupts the very next write or erase).
  void arm_crash(uint64_t events_from_now, CrashModel model,
                 uint64_t noise_seed) {
    crash_at_ = events_ + 1 + events_from_now;
    model_ = model;
    noise_state_ = noise_seed | 1;
  }
  void disarm_crash() { crash_at_ = 0; }
  uint64_t mutation_events() const { return events_; }

  // --- raw image ---

  // Page-major, little-endian words. For the three-page counter layout this
  // is a 6144-byte file.
  Bytes serialize() const {
    Bytes out;
    out.reserve(pages_.size() * kPageBytes);
    for (const PageState& p : pages_) {
      for (uint32_t w : p.words) {
        out.push_back(static_cast<uint8_t>(w));
        out.push_back(static_cast<uint8_t>(w >> 8));
        out.push_back(static_cast<uint8_t>(w >> 16));
        out.push_back(static_cast<uint8_t>(w >> 24));
      }
    }
    return out;
  }

  // Restores word contents only; wear counters restart at zero.
  static std::optional<FlashSim> deserialize(std::span<const uint8_t> image,
                                             FlashConfig config = {}) {
    if (image.empty() || image.size() % kPageBytes != 0) return std::nullopt;
    FlashSim flash(image.size() / kPageBytes, config);
    for (size_t p = 0; p < flash.pages_.size(); p++) {
      for (size_t w = 0; w < kPageWords; w++) {
        size_t off = p * kPageBytes + w * 4;
        flash.pages_[p].words[w] = uint32_t{image[off]} |
                                   (uint32_t{image[off + 1]} << 8) |
                                   (uint32_t{image[off + 2]} << 16) |
                                   (uint32_t{image[off + 3]} << 24);
      }
    }
    return flash;
  }

  FlashSim clone() const { return *this; }

 private:
  struct PageState {
    PageState() { words.fill(kErasedWord); write_counts.fill(0); }
    std::array<uint32_t, kPageWords> words;
    std::array<uint8_t, kPageWords> write_counts;
    int erases = 0;
  };

  void check_addr(size_t page, size_t word) const {
    if (page >= pages_.size() || word >= kPageWords) {
      throw FlashViolation("address out of range");
    }
  }

  bool crash_due() {
    events_++;
    return crash_at_ != 0 && events_ == crash_at_;
  }

  // Fill pattern for mid-transition bits: zero (the operation completed for
  // them) or xorshift noise.
  uint32_t noise() {
    if (model_ == CrashModel::kAllZeros) return 0;
    noise_state_ ^= noise_state_ << 13;
    noise_state_ ^= noise_state_ >> 7;
    noise_state_ ^= noise_state_ << 17;
    return static_cast<uint32_t>(noise_state_);
  }

  FlashConfig config_;
  std::vector<PageState> pages_;
  uint64_t events_ = 0;
  uint64_t crash_at_ = 0;
  CrashModel model_ = CrashModel::kRandomBits;
  uint64_t noise_state_ = 0x9e3779b97f4a7c15ull;
};

}  // namespace true2f

#endif  // TRUE2F_FLASH_HPP_

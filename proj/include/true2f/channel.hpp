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

#ifndef TRUE2F_CHANNEL_HPP_
#define TRUE2F_CHANNEL_HPP_

#include <deque>
#include <optional>

#include "true2f/wire.hpp"

// In-process transport between browser and token. Every frame is encoded to
// wire bytes and appended to a per-direction log, which is what the
// instrumentation layer inspects for sizes and exfiltration residue.

namespace true2f {

class Channel {
 public:
  void send_to_token(const wire::Frame& f) {
    log_to_token_.push_back(wire::encode_frame(f));
    to_token_.push_back(f);
  }

  void send_to_browser(const wire::Frame& f) {
    log_to_browser_.push_back(wire::encode_frame(f));
    to_browser_.push_back(f);
  }

  std::optional<wire::Frame> next_for_token() {
    if (to_token_.empty()) return std::nullopt;
    wire::Frame f = std::move(to_token_.front());
    to_token_.pop_front();
    return f;
  }

  std::optional<wire::Frame> next_for_browser() {
    if (to_browser_.empty()) return std::nullopt;
    wire::Frame f = std::move(to_browser_.front());
    to_browser_.pop_front();
    return f;
  }

  const std::vector<Bytes>& log_to_token() const { return log_to_token_; }
  const std::vector<Bytes>& log_to_browser() const { return log_to_browser_; }

  uint64_t bytes_to_token() const { return total(log_to_token_); }
  uint64_t bytes_to_browser() const { return total(log_to_browser_); }
  uint64_t total_bytes() const { return bytes_to_token() + bytes_to_browser(); }

 private:
  static uint64_t total(const std::vector<Bytes>& log) {
    uint64_t n = 0;
    for (const Bytes& b : log) n += b.size();
    return n;
  }

  std::deque<wire::Frame> to_token_;
  std::deque<wire::Frame> to_browser_;
  std::vector<Bytes> log_to_token_;
  std::vector<Bytes> log_to_browser_;
};

// A token is anything that consumes frames and replies on the channel. The
// browser under test is identical for the honest token and every adversarial
// variant behind this interface.
class TokenInterface {
 public:
  virtual ~TokenInterface() = default;
  virtual void handle_frame(const wire::Frame& frame, Channel& channel) = 0;
};

}  // namespace true2f

#endif  // TRUE2F_CHANNEL_HPP_

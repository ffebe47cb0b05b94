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

#ifndef TRUE2F_BYTES_HPP_
#define TRUE2F_BYTES_HPP_

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/hmac.h>
#include <openssl/sha.h>

namespace true2f {

using Bytes = std::vector<uint8_t>;
using Bytes32 = std::array<uint8_t, 32>;

class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

inline void append(Bytes& out, std::span<const uint8_t> data) {
  out.insert(out.end(), data.begin(), data.end());
}

inline void append_u8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void append_u16be(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

inline void append_u32be(Bytes& out, uint32_t v) {
  for (int i = 3; i >= 0; i--) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void append_u64be(Bytes& out, uint64_t v) {
  for (int i = 7; i >= 0; i--) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint32_t read_u32be(std::span<const uint8_t> in) {
  return (uint32_t{in[0]} << 24) | (uint32_t{in[1]} << 16) |
         (uint32_t{in[2]} << 8) | uint32_t{in[3]};
}

inline uint64_t read_u64be(std::span<const uint8_t> in) {
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v = (v << 8) | in[i];
  return v;
}

// Little-endian forms, used by the file formats (wire formats stay
// big-endian).
inline void append_u16le(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void append_u64le(Bytes& out, uint64_t v) {
  for (int i = 0; i < 8; i++) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint16_t read_u16le(std::span<const uint8_t> in) {
  return static_cast<uint16_t>(in[0] | (in[1] << 8));
}

inline uint64_t read_u64le(std::span<const uint8_t> in) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; i--) v = (v << 8) | in[i];
  return v;
}

inline Bytes concat(std::initializer_list<std::span<const uint8_t>> parts) {
  Bytes out;
  for (const auto& p : parts) append(out, p);
  return out;
}

inline std::span<const uint8_t> as_span(const std::string& s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline Bytes32 sha256(std::span<const uint8_t> data) {
  Bytes32 out;
  SHA256(data.data(), data.size(), out.data());
  return out;
}

inline Bytes32 hmac_sha256(std::span<const uint8_t> key,
                           std::span<const uint8_t> data) {
  Bytes32 out;
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
           data.size(), out.data(), &len) == nullptr ||
      len != out.size()) {
    throw InternalError("HMAC-SHA256 failed");
  }
  return out;
}

inline std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

inline std::optional<Bytes> from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<uint8_t>((hi << 4) | lo));
  }
  return out;
}

inline Bytes32 hex32(const std::string& hex) {
  auto bytes = from_hex(hex);
  if (!bytes || bytes->size() != 32) throw InternalError("bad hex32 literal");
  Bytes32 out;
  std::memcpy(out.data(), bytes->data(), 32);
  return out;
}

}  // namespace true2f

#endif  // TRUE2F_BYTES_HPP_

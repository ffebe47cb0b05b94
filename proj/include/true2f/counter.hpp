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

#ifndef TRUE2F_COUNTER_HPP_
#define TRUE2F_COUNTER_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "true2f/flash.hpp"

// Log-structured per-identity counters over three flash pages: one log page
// and two data pages. A data page holds a serial number, an overflow counter
// and up to 100 (identity-hash, count) entries; the page with the larger
// serial is active. The counter value of an identity is its number of valid
// log entries plus its active-table count, or plus the overflow counter when
// it has no table entry. Increments append to the log: a 4-word hash entry
// (2 flag bits + 126-bit identity hash) for identities absent from the active
// table, or a 16-bit pointer entry naming a table slot for present ones.
// When the next entry would not fit, garbage collection folds the log into
// the inactive page and erases the log.
//
// Log page layout (512 words = 1024 16-bit slots, two slots per word, slot 2k
// in the high half of word k):
//   pointer slot: [15]=invalid (1 until written) [14]=1 [13:7]=table index
//                 [6:0]=reserved (left erased)
//   hash entry:   4 words starting on a word boundary; as a 128-bit
//                 big-endian value: [127]=invalid [126]=0 [125:0]=identity
//                 hash. Words are written last-to-first so the invalid bit
//                 clears with the final write.
//   pad slot:     pointer slot with index 127, skipped by the parser; keeps
//                 hash entries word-aligned.
// Capacity: 128 hash entries or 1024 pointer entries per log fill.
//
// Data page layout (words):
//   0     serial: low 16 bits value, high 16 bits its complement
//   1     magic (validity gate: an interrupted page erase leaves garbage
//         that must never read as a table)
//   2     gc-started marker: cleared to 0 when this page, as the active one,
//         launches a garbage collection
//   3     log-cleared marker: cleared to 0 once that collection has erased
//         the log; between the two, recovery knows the log content predates
//         the fold
//   4,5   overflow counter (34 bits; both-erased means never written = 0)
//   6..   100 entries x 5 words: 126-bit identity hash then 34-bit count
//         packed into 160 bits (the hash's two masked-off low bits hold the
//         count's top two bits)
//
// Garbage-collection order: mark gc-started on the active page, erase the
// inactive page, write the folded table, write its overflow/magic/serial
// (serial last, making it active), erase the log, mark log-cleared. Every
// step is idempotent to re-run from the markers, which is what recovery does.
//
// The identity hash is the most-significant 126 bits of SHA-256(id).

namespace true2f {

inline constexpr size_t kLogPage = 0;
inline constexpr size_t kDataPageA = 1;
inline constexpr size_t kDataPageB = 2;
inline constexpr size_t kCounterPages = 3;

inline constexpr size_t kTableCapacity = 100;  // identities per data page
inline constexpr size_t kLogSlots = kPageWords * 2;
inline constexpr size_t kHashEntrySlots = 8;
inline constexpr uint64_t kMaxCount = (uint64_t{1} << 34) - 1;

inline constexpr uint32_t kTableMagic = 0x7ab1ec0d;
inline constexpr size_t kSerialWord = 0;
inline constexpr size_t kMagicWord = 1;
inline constexpr size_t kGcStartedWord = 2;
inline constexpr size_t kLogClearedWord = 3;
inline constexpr size_t kOverflowHighWord = 4;
inline constexpr size_t kOverflowLowWord = 5;
inline constexpr size_t kFirstEntryWord = 6;
inline constexpr size_t kEntryWords = 5;
static_assert(kFirstEntryWord + kTableCapacity * kEntryWords <= kPageWords);

// Log fill capacities, used by the capacity arithmetic.
inline constexpr uint64_t kLogHashCapacity = kLogSlots / kHashEntrySlots;  // 128
inline constexpr uint64_t kLogPointerCapacity = kLogSlots;                 // 1024

// Straw-man unary counter (documented for comparison, not used): one page
// encodes a count in unary at four cleared bits per increment, so a page
// counts to 512*(32/4) = 4096 and a two-page high/low pair counts to 2^24,
// or 2^23 with interrupt robustness.
inline constexpr uint64_t kStrawmanUnaryPageMax = kPageWords * (32 / 4);
inline constexpr uint64_t kStrawmanTwoPageMax = uint64_t{1} << 23;
inline constexpr uint64_t kStrawmanPagesPerCounter = 2;

struct IdHash {
  std::array<uint8_t, 16> bytes{};  // low 2 bits of bytes[15] always zero

  static IdHash from_id(std::span<const uint8_t> id) {
    Bytes32 digest = sha256(id);
    IdHash h;
    std::memcpy(h.bytes.data(), digest.data(), 16);
    h.bytes[15] &= 0xfc;
    return h;
  }

  auto operator<=>(const IdHash&) const = default;
};

struct CapacityReport {
  uint64_t worst_case_remaining;  // every increment a first-time identity
  uint64_t best_case_remaining;   // every increment hits the active table
};

class CounterStore {
 public:
  // Fresh store on factory-erased flash: serials 1 and 0, empty tables, all
  // counters read 0.
  static CounterStore init(FlashSim& flash) {
    CounterStore st(flash);
    st.write_empty_table(kDataPageA, 1);
    st.write_empty_table(kDataPageB, 0);
    st.active_page_ = kDataPageA;
    st.active_serial_ = 1;
    return st;
  }

  // Rebuilds a coherent store from flash in any post-crash state. Entries
  // whose invalid bit is still set are ignored; a garbage collection that was
  // in flight is completed (re-run from the fold, or just the final log
  // erase, depending on how far it got).
  static CounterStore recover(FlashSim& flash) {
    CounterStore st(flash);
    PageView a = st.read_page(kDataPageA);
    PageView b = st.read_page(kDataPageB);

    if (!a.valid && !b.valid) {
      return init(flash);
    }
    if (a.valid != b.valid) {
      // Interrupted initialization, or a collection target caught mid-erase.
      size_t valid_page = a.valid ? kDataPageA : kDataPageB;
      size_t other = a.valid ? kDataPageB : kDataPageA;
      const PageView& v = a.valid ? a : b;
      if (v.gc_started && !v.log_cleared) {
        st.adopt_active(valid_page, v);
        st.parse_log();
        st.redo_gc();
        return st;
      }
      uint16_t other_serial = v.serial == 0 ? 1 : v.serial - 1;
      flash.erase(other);
      st.write_empty_table(other, other_serial);
      if (other_serial > v.serial) {
        st.adopt_active(other, st.read_page(other));
      } else {
        st.adopt_active(valid_page, v);
      }
      st.parse_log();
      return st;
    }

    // Both pages valid.
    size_t hi_page = a.serial >= b.serial ? kDataPageA : kDataPageB;
    size_t lo_page = hi_page == kDataPageA ? kDataPageB : kDataPageA;
    PageView& hi = hi_page == kDataPageA ? a : b;
    PageView& lo = hi_page == kDataPageA ? b : a;

    if (lo.gc_started && !lo.log_cleared &&
        hi.serial == static_cast<uint16_t>(lo.serial + 1)) {
      // The fold completed and the serial bumped, but the log erase is not
      // confirmed. The log content predates the fold: erase it, never
      // re-fold it.
      st.adopt_active(hi_page, hi);
      if (!st.log_blank()) flash.erase(kLogPage);
      flash.write(lo_page, kLogClearedWord, 0);
      st.reset_log_state();
      return st;
    }
    if (hi.gc_started && !hi.log_cleared) {
      // Collection launched from the active page but the target never became
      // valid: re-run it against the intact log.
      st.adopt_active(hi_page, hi);
      st.parse_log();
      st.redo_gc();
      return st;
    }
    st.adopt_active(hi_page, hi);
    st.parse_log();
    return st;
  }

  // Increment the counter for id and return its new value, or nullopt when
  // the erase budget is exhausted (token end of life).
  std::optional<uint64_t> inc(std::span<const uint8_t> id) {
    IdHash h = IdHash::from_id(id);
    if (!ensure_space(h)) return std::nullopt;
    append_entry(h);
    return value_of(h);
  }

  // Read-only counter value.
  uint64_t value(std::span<const uint8_t> id) const {
    return value_of(IdHash::from_id(id));
  }

  // Folds the log into the inactive page now (the asynchronous-collection
  // hook; also used before export so the sync state needs no log image).
  // Returns false if the erase budget is exhausted.
  bool fold_log() {
    if (log_blank_mirror()) return true;
    return garbage_collect();
  }

  CapacityReport capacity() const {
    uint64_t remaining = static_cast<uint64_t>(
        std::max(0, flash_->erases_remaining(kLogPage)));
    CapacityReport r{};
    r.worst_case_remaining = remaining * kLogHashCapacity;
    uint64_t headroom =
        table_.empty() ? (kLogSlots - append_slot_) / kHashEntrySlots
                       : (kLogSlots - append_slot_);
    r.best_case_remaining =
        headroom + (remaining > 0 ? (remaining - 1) * kLogPointerCapacity : 0);
    return r;
  }

  // --- introspection (tests, reports, sync) ---

  uint64_t overflow() const { return overflow_; }
  size_t table_size() const { return table_.size(); }
  bool log_empty() const { return log_blank_mirror(); }
  uint16_t active_serial() const { return active_serial_; }
  size_t log_slots_used() const { return append_slot_; }
  FlashSim& flash() const { return *flash_; }

  struct TableEntry {
    IdHash hash;
    uint64_t count;
  };
  const std::vector<TableEntry>& table() const { return table_; }
  uint16_t inactive_serial() const { return inactive_serial_; }

  // Canonical semantic serialization of the durable state (both-page serials,
  // overflow, active table), little-endian like the other file formats. The
  // caller must fold the log first; this is what the browser sync state
  // embeds instead of raw page images.
  Bytes serialize_table() const {
    if (!log_blank_mirror()) throw InternalError("serialize requires folded log");
    Bytes out;
    append_u16le(out, active_serial_);
    append_u16le(out, inactive_serial_);
    append_u64le(out, overflow_);
    append_u8(out, static_cast<uint8_t>(table_.size()));
    for (const TableEntry& e : table_) {
      append(out, e.hash.bytes);
      append_u64le(out, e.count);
    }
    return out;
  }

  // Rebuilds a store (and its backing flash) from serialize_table output.
  static std::optional<CounterStore> deserialize_table(FlashSim& flash,
                                                       std::span<const uint8_t> in) {
    if (in.size() < 13) return std::nullopt;
    uint16_t active_serial = read_u16le(in.subspan(0, 2));
    uint16_t inactive_serial = read_u16le(in.subspan(2, 2));
    if (active_serial != static_cast<uint16_t>(inactive_serial + 1)) {
      return std::nullopt;
    }
    uint64_t overflow = read_u64le(in.subspan(4, 8));
    size_t n = in[12];
    if (n > kTableCapacity || in.size() != 13 + n * 24) return std::nullopt;
    if (overflow > kMaxCount) return std::nullopt;

    CounterStore st(flash);
    size_t active_page = kDataPageA;
    size_t inactive_page = kDataPageB;
    st.write_empty_table(inactive_page, inactive_serial);
    // Active page: entries, overflow, magic, serial.
    st.table_.clear();
    for (size_t i = 0; i < n; i++) {
      TableEntry e;
      std::memcpy(e.hash.bytes.data(), in.data() + 13 + i * 24, 16);
      if ((e.hash.bytes[15] & 0x03) != 0) return std::nullopt;
      e.count = read_u64le(in.subspan(13 + i * 24 + 16, 8));
      if (e.count > kMaxCount) return std::nullopt;
      st.table_.push_back(e);
    }
    st.write_table_page(active_page, active_serial, st.table_, overflow);
    st.active_page_ = active_page;
    st.active_serial_ = active_serial;
    st.inactive_serial_ = inactive_serial;
    st.overflow_ = overflow;
    st.rebuild_index();
    st.reset_log_state();
    return st;
  }

 private:
  explicit CounterStore(FlashSim& flash) : flash_(&flash) {
    if (flash.num_pages() < kCounterPages) {
      throw InternalError("counter needs three flash pages");
    }
  }

  struct PageView {
    bool valid = false;
    uint16_t serial = 0;
    bool gc_started = false;
    bool log_cleared = false;
    uint64_t overflow = 0;
    std::vector<TableEntry> entries;
  };

  // --- data page primitives ---

  static uint32_t serial_word(uint16_t serial) {
    return (static_cast<uint32_t>(static_cast<uint16_t>(~serial)) << 16) |
           serial;
  }

  PageView read_page(size_t page) const {
    PageView v;
    uint32_t sw = flash_->read(page, kSerialWord);
    uint16_t lo = static_cast<uint16_t>(sw);
    uint16_t hi = static_cast<uint16_t>(sw >> 16);
    if (hi != static_cast<uint16_t>(~lo)) return v;
    if (flash_->read(page, kMagicWord) != kTableMagic) return v;
    v.valid = true;
    v.serial = lo;
    v.gc_started = flash_->read(page, kGcStartedWord) == 0;
    v.log_cleared = flash_->read(page, kLogClearedWord) == 0;
    uint32_t oh = flash_->read(page, kOverflowHighWord);
    uint32_t ol = flash_->read(page, kOverflowLowWord);
    if (oh == kErasedWord && ol == kErasedWord) {
      v.overflow = 0;
    } else {
      v.overflow = (static_cast<uint64_t>(oh & 0x3) << 32) | ol;
    }
    for (size_t i = 0; i < kTableCapacity; i++) {
      size_t base = kFirstEntryWord + i * kEntryWords;
      bool erased = true;
      for (size_t w = 0; w < kEntryWords; w++) {
        erased &= (flash_->read(page, base + w) == kErasedWord);
      }
      if (erased) break;
      TableEntry e;
      for (size_t w = 0; w < 4; w++) {
        uint32_t word = flash_->read(page, base + w);
        e.hash.bytes[4 * w + 0] = static_cast<uint8_t>(word >> 24);
        e.hash.bytes[4 * w + 1] = static_cast<uint8_t>(word >> 16);
        e.hash.bytes[4 * w + 2] = static_cast<uint8_t>(word >> 8);
        e.hash.bytes[4 * w + 3] = static_cast<uint8_t>(word);
      }
      uint64_t count_high = e.hash.bytes[15] & 0x03;
      e.hash.bytes[15] &= 0xfc;
      e.count = (count_high << 32) | flash_->read(page, base + 4);
      v.entries.push_back(e);
    }
    return v;
  }

  void write_empty_table(size_t page, uint16_t serial) {
    flash_->write(page, kMagicWord, kTableMagic);
    flash_->write(page, kSerialWord, serial_word(serial));
  }

  void write_table_page(size_t page, uint16_t serial,
                        const std::vector<TableEntry>& entries,
                        uint64_t overflow) {
    for (size_t i = 0; i < entries.size(); i++) {
      const TableEntry& e = entries[i];
      size_t base = kFirstEntryWord + i * kEntryWords;
      std::array<uint8_t, 16> h = e.hash.bytes;
      h[15] = static_cast<uint8_t>(h[15] | ((e.count >> 32) & 0x3));
      for (size_t w = 0; w < 4; w++) {
        uint32_t word = (uint32_t{h[4 * w]} << 24) |
                        (uint32_t{h[4 * w + 1]} << 16) |
                        (uint32_t{h[4 * w + 2]} << 8) | uint32_t{h[4 * w + 3]};
        flash_->write(page, base + w, word);
      }
      flash_->write(page, base + 4, static_cast<uint32_t>(e.count));
    }
    flash_->write(page, kOverflowHighWord,
                  0xfffffffcu | static_cast<uint32_t>(overflow >> 32));
    flash_->write(page, kOverflowLowWord, static_cast<uint32_t>(overflow));
    flash_->write(page, kMagicWord, kTableMagic);
    flash_->write(page, kSerialWord, serial_word(serial));
  }

  void adopt_active(size_t page, const PageView& view) {
    active_page_ = page;
    active_serial_ = view.serial;
    overflow_ = view.overflow;
    table_ = view.entries;
    PageView other = read_page(other_page(page));
    inactive_serial_ = other.valid ? other.serial : 0;
    rebuild_index();
  }

  static size_t other_page(size_t page) {
    return page == kDataPageA ? kDataPageB : kDataPageA;
  }

  void rebuild_index() {
    table_index_.clear();
    for (size_t i = 0; i < table_.size(); i++) table_index_[table_[i].hash] = i;
  }

  // --- log primitives ---

  uint16_t read_slot(size_t slot) const {
    uint32_t word = flash_->read(kLogPage, slot / 2);
    return slot % 2 == 0 ? static_cast<uint16_t>(word >> 16)
                         : static_cast<uint16_t>(word);
  }

  void write_slot(size_t slot, uint16_t value) {
    uint32_t word = slot % 2 == 0
                        ? (static_cast<uint32_t>(value) << 16) | 0xffffu
                        : 0xffff0000u | value;
    flash_->write(kLogPage, slot / 2, word);
  }

  static constexpr uint16_t kSlotInvalidBit = 0x8000;
  static constexpr uint16_t kSlotPointerBit = 0x4000;
  static constexpr uint16_t kPadIndex = 0x7f;

  static uint16_t pointer_slot(uint8_t index) {
    return kSlotPointerBit | (static_cast<uint16_t>(index) << 7) | 0x7f;
  }

  bool log_blank() const {
    for (size_t w = 0; w < kPageWords; w++) {
      if (flash_->read(kLogPage, w) != kErasedWord) return false;
    }
    return true;
  }

  bool log_blank_mirror() const {
    return append_slot_ == 0 && log_order_.empty();
  }

  void reset_log_state() {
    append_slot_ = 0;
    log_counts_.clear();
    log_order_.clear();
  }

  // Rebuild the in-memory log mirror from flash. Tolerates trailing garbage
  // from interrupted writes: slots with the invalid bit set are skipped, as
  // are pointer slots with reserved indexes and hash entries that start on an
  // odd slot.
  void parse_log() {
    reset_log_state();
    size_t high_water = 0;
    for (size_t w = kPageWords; w > 0; w--) {
      if (flash_->read(kLogPage, w - 1) != kErasedWord) {
        high_water = w;
        break;
      }
    }
    size_t end_slot = high_water * 2;
    size_t pos = 0;
    while (pos < end_slot) {
      uint16_t slot = read_slot(pos);
      if ((slot & kSlotInvalidBit) != 0) {
        pos++;
        continue;
      }
      if ((slot & kSlotPointerBit) != 0) {
        uint8_t index = (slot >> 7) & 0x7f;
        if (index < table_.size()) {
          note_log_entry(table_[index].hash);
        }
        pos++;
        continue;
      }
      if (pos % 2 != 0 || pos + kHashEntrySlots > kLogSlots) {
        pos++;
        continue;
      }
      // 4-word hash entry: 128-bit value = flags || hash>>2.
      std::array<uint8_t, 16> e;
      for (size_t w2 = 0; w2 < 4; w2++) {
        uint32_t word = flash_->read(kLogPage, pos / 2 + w2);
        e[4 * w2 + 0] = static_cast<uint8_t>(word >> 24);
        e[4 * w2 + 1] = static_cast<uint8_t>(word >> 16);
        e[4 * w2 + 2] = static_cast<uint8_t>(word >> 8);
        e[4 * w2 + 3] = static_cast<uint8_t>(word);
      }
      IdHash h;
      for (size_t i = 0; i < 15; i++) {
        h.bytes[i] = static_cast<uint8_t>((e[i] << 2) | (e[i + 1] >> 6));
      }
      h.bytes[15] = static_cast<uint8_t>(e[15] << 2) & 0xfc;
      note_log_entry(h);
      pos += kHashEntrySlots;
    }
    append_slot_ = end_slot;
  }

  void note_log_entry(const IdHash& h) {
    log_counts_[h]++;
    log_order_.push_back(h);
  }

  // --- increments ---

  bool ensure_space(const IdHash& h) {
    size_t needed = entry_slots(h);
    if (append_slot_ + needed <= kLogSlots) return true;
    if (!garbage_collect()) return false;
    return append_slot_ + entry_slots(h) <= kLogSlots;
  }

  size_t entry_slots(const IdHash& h) const {
    if (table_index_.count(h) != 0) return 1;
    return kHashEntrySlots + (append_slot_ % 2 != 0 ? 1 : 0);
  }

  void append_entry(const IdHash& h) {
    auto it = table_index_.find(h);
    if (it != table_index_.end()) {
      write_slot(append_slot_, pointer_slot(static_cast<uint8_t>(it->second)));
      append_slot_++;
      note_log_entry(h);
      return;
    }
    if (append_slot_ % 2 != 0) {
      write_slot(append_slot_, pointer_slot(kPadIndex));
      append_slot_++;
    }
    // Entry value: (flags=00) || hash >> 2. Low-to-high word write order so
    // the invalid bit (in the first word) clears last.
    std::array<uint8_t, 16> e{};
    e[0] = static_cast<uint8_t>(h.bytes[0] >> 2);
    for (size_t i = 1; i < 16; i++) {
      e[i] = static_cast<uint8_t>((h.bytes[i - 1] << 6) | (h.bytes[i] >> 2));
    }
    size_t base_word = append_slot_ / 2;
    for (size_t w = 4; w > 0; w--) {
      size_t i = w - 1;
      uint32_t word = (uint32_t{e[4 * i]} << 24) | (uint32_t{e[4 * i + 1]} << 16) |
                      (uint32_t{e[4 * i + 2]} << 8) | uint32_t{e[4 * i + 3]};
      flash_->write(kLogPage, base_word + i, word);
    }
    append_slot_ += kHashEntrySlots;
    note_log_entry(h);
  }

  uint64_t value_of(const IdHash& h) const {
    uint64_t log_count = 0;
    auto it = log_counts_.find(h);
    if (it != log_counts_.end()) log_count = it->second;
    auto t = table_index_.find(h);
    uint64_t base = t != table_index_.end() ? table_[t->second].count
                                            : overflow_;
    return log_count + base;
  }

  // --- garbage collection ---

  // Survivors: identities most recently used in the log first, then table
  // entries by largest count; equal counts evict the larger hash. Survivor
  // counts are their current values, so surviving values are unchanged. The
  // overflow becomes the maximum of its old value and every evicted value.
  bool garbage_collect() {
    if (flash_->erases_remaining(kLogPage) < 1 ||
        flash_->erases_remaining(other_page(active_page_)) < 1) {
      return false;
    }
    std::vector<TableEntry> survivors = select_survivors();
    uint64_t new_overflow = overflow_;
    std::set<IdHash> kept;
    for (const TableEntry& e : survivors) kept.insert(e.hash);
    for (const TableEntry& e : table_) {
      if (kept.count(e.hash) == 0) {
        new_overflow = std::max(new_overflow, value_of(e.hash));
      }
    }
    for (const auto& [h, n] : log_counts_) {
      if (kept.count(h) == 0) new_overflow = std::max(new_overflow, value_of(h));
    }

    size_t target = other_page(active_page_);
    uint16_t new_serial = static_cast<uint16_t>(active_serial_ + 1);

    flash_->write(active_page_, kGcStartedWord, 0);
    flash_->erase(target);
    write_table_page(target, new_serial, survivors, new_overflow);
    flash_->erase(kLogPage);
    flash_->write(active_page_, kLogClearedWord, 0);

    size_t old_active = active_page_;
    active_page_ = target;
    inactive_serial_ = active_serial_;
    active_serial_ = new_serial;
    overflow_ = new_overflow;
    table_ = std::move(survivors);
    rebuild_index();
    reset_log_state();
    (void)old_active;
    return true;
  }

  // Re-runs an interrupted collection from the markers: the fold is
  // deterministic in the (intact) log and old table, and write paths write
  // the same values, so this is idempotent.
  void redo_gc() {
    if (!garbage_collect()) {
      throw FlashViolation("erase budget exhausted during recovery");
    }
  }

  std::vector<TableEntry> select_survivors() const {
    std::vector<TableEntry> out;
    std::set<IdHash> chosen;
    for (auto it = log_order_.rbegin();
         it != log_order_.rend() && out.size() < kTableCapacity; ++it) {
      if (chosen.insert(*it).second) {
        out.push_back(TableEntry{*it, value_of(*it)});
      }
    }
    if (out.size() < kTableCapacity) {
      std::vector<TableEntry> rest;
      for (const TableEntry& e : table_) {
        if (chosen.count(e.hash) == 0) rest.push_back(e);
      }
      std::sort(rest.begin(), rest.end(), [](const auto& x, const auto& y) {
        if (x.count != y.count) return x.count > y.count;
        return x.hash < y.hash;  // equal counts: evict the larger hash
      });
      for (const TableEntry& e : rest) {
        if (out.size() >= kTableCapacity) break;
        out.push_back(TableEntry{e.hash, value_of(e.hash)});
        chosen.insert(e.hash);
      }
    }
    // Canonical page layout: sorted by hash.
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.hash < y.hash; });
    for (const TableEntry& e : out) {
      if (e.count > kMaxCount) throw InternalError("count exceeds 34 bits");
    }
    return out;
  }

  FlashSim* flash_;
  size_t active_page_ = kDataPageA;
  uint16_t active_serial_ = 1;
  uint16_t inactive_serial_ = 0;
  uint64_t overflow_ = 0;
  std::vector<TableEntry> table_;
  std::map<IdHash, size_t> table_index_;
  std::map<IdHash, uint64_t> log_counts_;
  std::vector<IdHash> log_order_;
  size_t append_slot_ = 0;
};

}  // namespace true2f

#endif  // TRUE2F_COUNTER_HPP_

#pragma once

// Static query substructures shared by the threshold and RAM engines.

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "tkdr/common.hpp"
#include "tkdr/io_tape.hpp"
#include "tkdr/serial.hpp"

namespace tkdr {

struct StreamItem {
  Score score = 0;
  std::uint32_t payload = 0;
  friend bool operator==(const StreamItem&, const StreamItem&) = default;
};

// ---------------------------------------------------------------------------

/// Plain bit vector with constant-time rank and near-constant select.
/// Positions are 1-based: rank1(p) counts ones in [1, p]; select1(i) is the
/// position of the i-th one.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(const std::vector<bool>& bits);

  std::uint64_t size() const { return size_; }
  std::uint64_t ones() const { return ones_; }
  bool get(std::uint64_t pos) const;  // 1-based
  std::uint64_t rank1(std::uint64_t pos) const;
  std::uint64_t rank0(std::uint64_t pos) const { return pos - rank1(pos); }
  std::uint64_t select1(std::uint64_t i) const;
  std::uint64_t select0(std::uint64_t i) const;

  /// Storage in 64-bit words, directories included.
  std::uint64_t word_count() const;

  void save(Writer& w) const;
  static BitVec load(Reader& r);

 private:
  void build_directories();
  template <bool kOnes>
  std::uint64_t select_impl(std::uint64_t i) const;

  std::uint64_t size_ = 0;
  std::uint64_t ones_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint64_t> super_;  // ones before each 512-bit superblock
  std::vector<std::uint32_t> sample1_, sample0_;  // superblock of every 512th one / zero
};

/// Sorted multiset of non-negative integers in unary-gap encoding over a BitVec,
/// offset by the smallest value so only the spanned range costs bits.
class RankDict {
 public:
  RankDict() = default;
  explicit RankDict(std::vector<std::uint64_t> values);

  std::uint64_t size() const { return count_; }
  /// Number of stored values strictly less than x.
  std::uint64_t rank_of(std::int64_t x) const;
  /// i-th smallest value, 1-based.
  std::uint64_t select_pos(std::uint64_t i) const;
  std::uint64_t word_count() const { return bits_.word_count(); }

  /// Blocks charged per lookup: select directory, superblock directory, bits.
  static constexpr std::uint64_t kLookupBlocks = 3;
  /// Distinct blocks touched by `lookups` lookups; a small dictionary cannot
  /// touch more blocks than it occupies.
  std::uint64_t lookup_blocks(std::uint64_t lookups, std::uint64_t block_words) const {
    const std::uint64_t held = (word_count() + 2 + block_words - 1) / block_words;
    return std::min(lookups * kLookupBlocks, std::max<std::uint64_t>(held, 1));
  }

  void save(Writer& w) const;
  static RankDict load(Reader& r);

 private:
  std::uint64_t count_ = 0;
  std::uint64_t base_ = 0;      // min value
  std::uint64_t universe_ = 0;  // max value - base + 1
  BitVec bits_;
};

// ---------------------------------------------------------------------------

struct Point2 {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t payload = 0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Static B-ary priority search tree for [x1, x2] x [tau, inf) queries.
/// Each node keeps the `capacity` highest points of its x-slab not stored
/// higher up; the rest is split by x among up to `fanout` children.
class ThreeSided {
 public:
  ThreeSided() = default;
  ThreeSided(std::vector<Point2> points, std::uint64_t block_words);

  std::size_t size() const { return points_.size(); }
  /// Appends matching points to `out` in block order. Charges node records
  /// and point blocks to the tape under `phase`.
  void query(std::uint32_t x1, std::uint32_t x2, std::uint32_t tau, std::vector<Point2>& out,
             IoTape* tape = nullptr, Phase phase = Phase::kHigh) const;
  /// Same result set, y-descending.
  std::vector<Point2> query_sorted(std::uint32_t x1, std::uint32_t x2, std::uint32_t tau) const;

  std::uint64_t word_count() const { return 3 * points_.size() + kNodeWords * nodes_.size(); }

  void save(Writer& w) const;
  static ThreeSided load(Reader& r);

 private:
  struct Node {
    std::uint32_t first_point = 0;
    std::uint32_t point_count = 0;
    std::uint32_t first_child = 0;
    std::uint32_t child_count = 0;
    std::uint32_t x_lo = 0;
    std::uint32_t x_hi = 0;
  };
  static constexpr std::uint64_t kNodeWords = 6;

  std::uint64_t capacity_ = 1;
  std::vector<Node> nodes_;       // BFS order, children contiguous
  std::vector<Point2> points_;    // per node, y-descending
};

// ---------------------------------------------------------------------------

struct WeightedInterval {
  std::uint32_t start = 0;  // inclusive
  std::uint32_t end = 0;    // inclusive
  Score weight = 0;
  std::uint32_t payload = 0;
};

/// Interval stabbing with priority. A sweep over the coordinates maintains the
/// list of live intervals in weight-descending order; every version of that
/// list is kept through fat nodes (per-node lists of versioned next pointers).
class PersistentStabbing {
 public:
  PersistentStabbing() = default;
  explicit PersistentStabbing(const std::vector<WeightedInterval>& intervals);

  class Cursor {
   public:
    std::optional<StreamItem> next();

   private:
    friend class PersistentStabbing;
    Cursor(const PersistentStabbing* s, std::uint32_t version, Score tau, BlockCounter* io)
        : s_(s), version_(version), tau_(tau), io_(io) {}
    const PersistentStabbing* s_ = nullptr;
    std::uint32_t version_ = 0;
    std::uint32_t node_ = 0;  // sentinel
    Score tau_ = 0;
    bool done_ = false;
    BlockCounter* io_ = nullptr;
  };

  /// Weight-descending stream of intervals containing x with weight >= tau.
  /// The optional counter records the blocks the traversal touches.
  Cursor stab(std::uint32_t x, Score tau, BlockCounter* io = nullptr) const;
  std::vector<StreamItem> stab_all(std::uint32_t x, Score tau, BlockCounter* io = nullptr) const;

  std::size_t size() const { return weight_.size() - 1; }
  std::size_t version_count() const { return version_coord_.size(); }
  std::uint64_t word_count() const;

  void save(Writer& w) const;
  static PersistentStabbing load(Reader& r);

 private:
  static constexpr std::uint32_t kNil = 0xFFFFFFFFu;
  std::uint32_t next_at(std::uint32_t node, std::uint32_t version, BlockCounter* io) const;

  std::vector<std::uint64_t> version_coord_;
  // Node 0 is the list head sentinel; nodes 1..m in weight-descending order.
  std::vector<Score> weight_{0};
  std::vector<std::uint32_t> payload_{0};
  std::vector<std::uint32_t> mod_begin_{0, 0};  // m + 2 offsets into the mod arrays
  std::vector<std::uint32_t> mod_version_;
  std::vector<std::uint32_t> mod_next_;
};

// ---------------------------------------------------------------------------

/// Streams a subarray in non-increasing order: range-maximum over A plus a
/// heap of pending subranges.
class OnlineSortedRange {
 public:
  OnlineSortedRange() = default;
  explicit OnlineSortedRange(std::vector<Score> values);

  class Cursor {
   public:
    /// Next value and its 1-based position.
    std::optional<StreamItem> next();

   private:
    friend class OnlineSortedRange;
    struct Pending {
      Score value;
      std::uint32_t pos, lo, hi;
      bool operator<(const Pending& o) const { return value != o.value ? value < o.value : pos > o.pos; }
    };
    explicit Cursor(const OnlineSortedRange* s) : s_(s) {}
    void push(std::uint32_t lo, std::uint32_t hi);
    const OnlineSortedRange* s_;
    std::priority_queue<Pending> heap_;
  };

  std::size_t size() const { return values_.size(); }
  /// 1-based inclusive bounds; an empty range (i > j) yields an empty stream.
  Cursor query(std::uint64_t i, std::uint64_t j) const;
  std::uint64_t word_count() const;

  void save(Writer& w) const;
  static OnlineSortedRange load(Reader& r);

 private:
  std::uint32_t argmax(std::uint32_t lo, std::uint32_t hi) const;  // 0-based inclusive
  void build();

  std::vector<Score> values_;
  std::vector<std::vector<std::uint32_t>> table_;
};

}  // namespace tkdr

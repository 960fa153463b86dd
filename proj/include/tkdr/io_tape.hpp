#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <unordered_set>

namespace tkdr {

enum class Phase : unsigned { kLocus, kEqui, kHigh, kConversion, kSelection };
inline constexpr std::size_t kPhaseCount = 5;

inline std::string_view phase_name(Phase p) {
  constexpr std::array<std::string_view, kPhaseCount> names = {"locus", "equi", "high", "conversion",
                                                              "selection"};
  return names[static_cast<unsigned>(p)];
}

/// Simulated block-transfer accountant for one query.
class IoTape {
 public:
  explicit IoTape(std::uint64_t block_words = 1) : block_(block_words ? block_words : 1) {}

  std::uint64_t block_words() const { return block_; }

  void charge(Phase p, std::uint64_t blocks) { counts_[static_cast<unsigned>(p)] += blocks; }
  /// Charge a sequential scan of `words` words.
  void charge_scan(Phase p, std::uint64_t words) { charge(p, (words + block_ - 1) / block_); }

  std::uint64_t phase(Phase p) const { return counts_[static_cast<unsigned>(p)]; }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }
  void reset() { counts_.fill(0); }

 private:
  std::uint64_t block_;
  std::array<std::uint64_t, kPhaseCount> counts_{};
};

/// Counts distinct blocks touched during one traversal of one structure and
/// charges them to the tape when it goes out of scope. A null tape disables
/// accounting.
class BlockCounter {
 public:
  BlockCounter(IoTape* tape, Phase phase) : tape_(tape), phase_(phase) {}
  BlockCounter(const BlockCounter&) = delete;
  BlockCounter& operator=(const BlockCounter&) = delete;
  ~BlockCounter() {
    if (tape_) tape_->charge(phase_, blocks_.size());
  }

  void touch(std::uint64_t word_offset) {
    if (tape_) blocks_.insert(word_offset / tape_->block_words());
  }
  void touch_range(std::uint64_t first_word, std::uint64_t words) {
    if (!tape_ || words == 0) return;
    auto b = tape_->block_words();
    for (auto blk = first_word / b; blk <= (first_word + words - 1) / b; ++blk) blocks_.insert(blk);
  }

 private:
  IoTape* tape_;
  Phase phase_;
  std::unordered_set<std::uint64_t> blocks_;
};

}  // namespace tkdr

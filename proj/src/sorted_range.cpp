#include <algorithm>

#include "tkdr/geom.hpp"

namespace tkdr {

OnlineSortedRange::OnlineSortedRange(std::vector<Score> values) : values_(std::move(values)) { build(); }

void OnlineSortedRange::build() {
  table_.clear();
  const std::size_t n = values_.size();
  if (n == 0) return;
  const unsigned levels = floor_log2(n) + 1;
  table_.resize(levels);
  table_[0].resize(n);
  for (std::size_t i = 0; i < n; ++i) table_[0][i] = static_cast<std::uint32_t>(i);
  for (unsigned l = 1; l < levels; ++l) {
    const std::size_t span = std::size_t{1} << l;
    table_[l].resize(n - span + 1);
    for (std::size_t i = 0; i + span <= n; ++i) {
      auto a = table_[l - 1][i];
      auto b = table_[l - 1][i + span / 2];
      table_[l][i] = values_[a] >= values_[b] ? a : b;
    }
  }
}

std::uint32_t OnlineSortedRange::argmax(std::uint32_t lo, std::uint32_t hi) const {
  unsigned l = floor_log2(hi - lo + 1);
  auto a = table_[l][lo];
  auto b = table_[l][hi + 1 - (std::size_t{1} << l)];
  return values_[a] >= values_[b] ? a : b;
}

void OnlineSortedRange::Cursor::push(std::uint32_t lo, std::uint32_t hi) {
  if (lo > hi) return;
  auto pos = s_->argmax(lo, hi);
  heap_.push(Pending{s_->values_[pos], pos, lo, hi});
}

std::optional<StreamItem> OnlineSortedRange::Cursor::next() {
  if (heap_.empty()) return std::nullopt;
  Pending top = heap_.top();
  heap_.pop();
  if (top.pos > top.lo) push(top.lo, top.pos - 1);
  if (top.pos < top.hi) push(top.pos + 1, top.hi);
  return StreamItem{top.value, top.pos + 1};
}

OnlineSortedRange::Cursor OnlineSortedRange::query(std::uint64_t i, std::uint64_t j) const {
  Cursor c(this);
  if (i > j) return c;
  if (i == 0 || j > values_.size()) throw Error(ErrorCode::kOutOfRange, "range out of bounds");
  c.push(static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1));
  return c;
}

std::uint64_t OnlineSortedRange::word_count() const {
  std::uint64_t w = values_.size();
  for (const auto& row : table_) w += row.size();
  return w;
}

void OnlineSortedRange::save(Writer& w) const { w.put_vec(values_); }

OnlineSortedRange OnlineSortedRange::load(Reader& r) {
  OnlineSortedRange s;
  s.values_ = r.get_vec<Score>();
  s.build();
  return s;
}

}  // namespace tkdr

#include <algorithm>
#include <bit>

#include "tkdr/geom.hpp"

namespace tkdr {

namespace {
constexpr std::uint64_t kSuperBits = 512;
constexpr std::uint64_t kSuperWords = kSuperBits / 64;
constexpr std::uint64_t kSampleRate = 512;

std::uint64_t select_in_word(std::uint64_t w, std::uint64_t i) {  // i-th one, 1-based, returns 0-based bit
  for (std::uint64_t r = 1;; ++r) {
    auto pos = static_cast<std::uint64_t>(std::countr_zero(w));
    if (r == i) return pos;
    w &= w - 1;
  }
}
}  // namespace

BitVec::BitVec(const std::vector<bool>& bits) : size_(bits.size()), words_((bits.size() + 63) / 64, 0) {
  for (std::uint64_t i = 0; i < size_; ++i) {
    if (bits[i]) words_[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  build_directories();
}

void BitVec::build_directories() {
  const std::uint64_t supers = (words_.size() + kSuperWords - 1) / kSuperWords + 1;
  super_.assign(supers, 0);
  std::uint64_t acc = 0;
  for (std::uint64_t w = 0; w < words_.size(); ++w) {
    if (w % kSuperWords == 0) super_[w / kSuperWords] = acc;
    acc += static_cast<std::uint64_t>(std::popcount(words_[w]));
  }
  super_.back() = acc;
  ones_ = acc;
  sample1_.clear();
  sample0_.clear();
  std::uint64_t ones = 0, zeros = 0;
  for (std::uint64_t w = 0; w < words_.size(); ++w) {
    std::uint64_t valid = std::min<std::uint64_t>(64, size_ - w * 64);
    std::uint64_t o = static_cast<std::uint64_t>(std::popcount(words_[w]));
    std::uint64_t z = valid - o;
    // record the superblock holding target number k*kSampleRate + 1
    while (sample1_.size() * kSampleRate < ones + o) sample1_.push_back(static_cast<std::uint32_t>(w / kSuperWords));
    while (sample0_.size() * kSampleRate < zeros + z) sample0_.push_back(static_cast<std::uint32_t>(w / kSuperWords));
    ones += o;
    zeros += z;
  }
}

bool BitVec::get(std::uint64_t pos) const {
  if (pos == 0 || pos > size_) throw Error(ErrorCode::kOutOfRange, "bit position out of range");
  --pos;
  return (words_[pos / 64] >> (pos % 64)) & 1u;
}

std::uint64_t BitVec::rank1(std::uint64_t pos) const {
  if (pos > size_) pos = size_;
  const std::uint64_t word = pos / 64;
  std::uint64_t r = super_[word / kSuperWords];
  for (std::uint64_t w = word - word % kSuperWords; w < word; ++w) r += std::popcount(words_[w]);
  if (pos % 64) r += std::popcount(words_[word] & ((std::uint64_t{1} << (pos % 64)) - 1));
  return r;
}

template <bool kOnes>
std::uint64_t BitVec::select_impl(std::uint64_t i) const {
  const std::uint64_t total = kOnes ? ones_ : size_ - ones_;
  if (i == 0 || i > total) throw Error(ErrorCode::kOutOfRange, "select out of range");
  const auto& sample = kOnes ? sample1_ : sample0_;
  auto before = [&](std::uint64_t s) { return kOnes ? super_[s] : s * kSuperBits - super_[s]; };
  const std::uint64_t j = (i - 1) / kSampleRate;
  std::uint64_t lo = sample[j];
  std::uint64_t hi = j + 1 < sample.size() ? sample[j + 1] : super_.size() - 2;
  while (lo < hi) {  // last superblock with before(s) < i
    std::uint64_t mid = (lo + hi + 1) / 2;
    if (before(mid) < i) lo = mid; else hi = mid - 1;
  }
  std::uint64_t seen = before(lo);
  for (std::uint64_t w = lo * kSuperWords; w < words_.size(); ++w) {
    std::uint64_t bits = kOnes ? words_[w] : ~words_[w];
    const std::uint64_t valid = std::min<std::uint64_t>(64, size_ - w * 64);
    if (valid < 64) bits &= (std::uint64_t{1} << valid) - 1;
    const auto c = static_cast<std::uint64_t>(std::popcount(bits));
    if (seen + c >= i) return w * 64 + select_in_word(bits, i - seen) + 1;
    seen += c;
  }
  throw Error(ErrorCode::kOutOfRange, "select out of range");
}

std::uint64_t BitVec::select1(std::uint64_t i) const { return select_impl<true>(i); }
std::uint64_t BitVec::select0(std::uint64_t i) const { return select_impl<false>(i); }

std::uint64_t BitVec::word_count() const {
  return words_.size() + super_.size() + (sample0_.size() + sample1_.size() + 1) / 2;
}

void BitVec::save(Writer& w) const {
  w.put<std::uint64_t>(size_);
  w.put_vec(words_);
}

BitVec BitVec::load(Reader& r) {
  BitVec v;
  v.size_ = r.get<std::uint64_t>();
  v.words_ = r.get_vec<std::uint64_t>();
  if (v.words_.size() != (v.size_ + 63) / 64) throw Error(ErrorCode::kCorrupt, "bit vector length");
  if (v.size_ % 64 && (v.words_.back() >> (v.size_ % 64))) throw Error(ErrorCode::kCorrupt, "bit vector padding");
  v.build_directories();
  return v;
}

// ---------------------------------------------------------------------------

RankDict::RankDict(std::vector<std::uint64_t> values) : count_(values.size()) {
  std::sort(values.begin(), values.end());
  base_ = values.empty() ? 0 : values.front();
  for (auto& v : values) v -= base_;
  universe_ = values.empty() ? 0 : values.back() + 1;
  std::vector<bool> bits;
  bits.reserve(count_ + universe_);
  std::size_t k = 0;
  for (std::uint64_t u = 0; u < universe_; ++u) {
    while (k < values.size() && values[k] == u) {
      bits.push_back(true);
      ++k;
    }
    bits.push_back(false);
  }
  bits_ = BitVec(bits);
}

std::uint64_t RankDict::rank_of(std::int64_t x) const {
  if (x <= 0 || static_cast<std::uint64_t>(x) <= base_) return 0;
  const auto ux = static_cast<std::uint64_t>(x) - base_;
  if (ux >= universe_) return count_;
  // zero number x closes the run of value x - 1
  return bits_.select0(ux) - ux;
}

std::uint64_t RankDict::select_pos(std::uint64_t i) const {
  if (i == 0 || i > count_) throw Error(ErrorCode::kOutOfRange, "select out of range");
  return bits_.select1(i) - i + base_;
}

void RankDict::save(Writer& w) const {
  w.put<std::uint64_t>(count_);
  w.put<std::uint64_t>(base_);
  w.put<std::uint64_t>(universe_);
  bits_.save(w);
}

RankDict RankDict::load(Reader& r) {
  RankDict d;
  d.count_ = r.get<std::uint64_t>();
  d.base_ = r.get<std::uint64_t>();
  d.universe_ = r.get<std::uint64_t>();
  d.bits_ = BitVec::load(r);
  if (d.bits_.size() != d.count_ + d.universe_ || d.bits_.ones() != d.count_) {
    throw Error(ErrorCode::kCorrupt, "dictionary size");
  }
  return d;
}

}  // namespace tkdr

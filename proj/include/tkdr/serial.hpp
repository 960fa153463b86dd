#pragma once

// Little-endian fixed-width binary encoding used by the index container.

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "tkdr/common.hpp"

namespace tkdr {

class Writer {
 public:
  template <typename T>
    requires std::is_integral_v<T>
  void put(T v) {
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<char>(u & 0xFF));
      if constexpr (sizeof(T) > 1) u >>= 8;
    }
  }

  template <typename T>
    requires std::is_integral_v<T>
  void put_vec(const std::vector<T>& v) {
    put<std::uint64_t>(v.size());
    for (const T& x : v) put(x);
  }

  void put_bytes(std::string_view s) {
    put<std::uint64_t>(s.size());
    buf_.append(s);
  }

  const std::string& data() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
    requires std::is_integral_v<T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  template <typename T>
    requires std::is_integral_v<T>
  std::vector<T> get_vec() {
    auto n = get<std::uint64_t>();
    if (n > (data_.size() - pos_) / sizeof(T)) throw Error(ErrorCode::kCorrupt, "truncated array");
    std::vector<T> v(n);
    for (auto& x : v) x = get<T>();
    return v;
  }

  std::string get_bytes() {
    auto n = get<std::uint64_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) throw Error(ErrorCode::kCorrupt, "truncated section");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace tkdr

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tkdr {

using NodeId = std::uint32_t;  // preorder id, root = 1, dummy parent of root = 0
using LinkId = std::uint32_t;
using DocId = std::uint32_t;   // 1-based
using Score = std::uint32_t;   // rank-space score, 1..|links|

inline constexpr NodeId kDummyNode = 0;
inline constexpr NodeId kRootNode = 1;
inline constexpr unsigned char kTerminator = 0x00;

enum class ErrorCode {
  kInvalidArgument = 1,
  kOutOfRange,
  kIo,
  kCorrupt,
  kVersionMismatch,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// floor(log2(x)) for x >= 1
inline unsigned floor_log2(std::uint64_t x) {
  unsigned r = 0;
  while (x >>= 1) ++r;
  return r;
}

inline unsigned ceil_log2(std::uint64_t x) {
  if (x <= 1) return 0;
  return floor_log2(x - 1) + 1;
}

}  // namespace tkdr

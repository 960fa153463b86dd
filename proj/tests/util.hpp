#pragma once

#include <random>
#include <string>
#include <vector>

#include "tkdr/corpus.hpp"

namespace tkdr::test {

inline DocumentCollection random_docs(std::uint64_t seed, std::size_t docs, std::size_t max_len, int sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> ch(0, sigma - 1);
  std::vector<std::string> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string s(len(rng), 'a');
    for (auto& c : s) c = static_cast<char>('a' + ch(rng));
    out.push_back(std::move(s));
  }
  return DocumentCollection(std::move(out));
}

// Every offset in `text` where `pattern` starts.
inline std::vector<std::uint64_t> naive_find_all(std::string_view text, std::string_view pattern) {
  std::vector<std::uint64_t> out;
  if (pattern.size() > text.size()) return out;
  // an empty pattern matches once per suffix
  for (std::size_t i = 0; i + pattern.size() <= text.size() && i < text.size(); ++i) {
    if (text.compare(i, pattern.size(), pattern) == 0) out.push_back(i);
  }
  return out;
}

}  // namespace tkdr::test

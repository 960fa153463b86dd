#pragma once

#include <vector>

#include "tkdr/topk.hpp"

namespace tkdr {

struct MergeStats {
  std::uint64_t pops = 0;
  std::uint64_t streams = 0;
};

/// First k items of the union of weight-descending streams, descending.
/// Throws "unsorted stream" when a stream goes up.
std::vector<StreamItem> merge_streams(std::vector<LinkStream>& streams, std::uint64_t k, MergeStats* stats = nullptr);

/// Word-RAM engine (B = 1) returning the top k in decreasing score order.
class RamIndex {
 public:
  struct Result {
    std::vector<Link> hits;  // score-descending
    bool small_path = false;
    std::uint64_t select_calls = 0;
    std::uint64_t pops = 0;
    std::uint64_t streams = 0;
  };

  RamIndex() = default;
  RamIndex(const GSTree& tree, std::span<const Link> links);

  std::uint64_t g() const { return marks_.g(); }
  const ThresholdIndex& base() const { return base_; }
  const MarkedSet& marks() const { return marks_; }

  Result query(NodeId u, std::uint64_t k) const;
  /// Forced paths; the small one needs u to have a prime ancestor.
  Result query_small(NodeId u, std::uint64_t k) const;
  Result query_large(NodeId u, std::uint64_t k) const;

  bool has_bits(NodeId u) const { return u < node_bits_.size() - 1 && node_bits_[u + 1] > node_bits_[u]; }
  /// Candidate list of u's prime, best first, and u's bit row over it.
  std::span<const Link> candidates(NodeId u) const;
  std::span<const LinkId> candidate_sources(NodeId u) const;  // global link ids
  std::vector<bool> bits(NodeId u) const;

  std::uint64_t bit_count() const { return bits_.size(); }
  std::uint64_t word_count() const;

  void save(Writer& w) const;
  static RamIndex load(Reader& r);

 private:
  std::size_t prime_slot(NodeId u) const;

  ThresholdIndex base_;
  MarkedSet marks_;
  Sketch sketch_;
  std::vector<NodeId> primes_;
  std::vector<std::uint64_t> cand_offsets_;  // primes_.size() + 1
  std::vector<Link> cands_;                  // per prime, score-descending
  std::vector<LinkId> cand_sources_;
  std::vector<std::uint64_t> node_bits_;     // node count + 2 offsets into bits_
  BitVec bits_;
};

}  // namespace tkdr

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tkdr/threshold.hpp"

namespace tkdr {

/// Nodes marked by grouping every g consecutive leaves, closed under LCA,
/// plus the root. Prime nodes are the children of marked nodes.
class MarkedSet {
 public:
  MarkedSet() = default;
  MarkedSet(const TreeShape& tree, const Lca& lca, std::uint64_t g);

  std::uint64_t g() const { return g_; }
  bool is_marked(NodeId u) const { return marked_.at(u) != 0; }
  bool is_prime(NodeId u) const { return u != kDummyNode && lowest_prime_.at(u) == u; }
  const std::vector<NodeId>& marked_nodes() const { return list_; }
  std::vector<NodeId> prime_nodes() const;

  /// u*: the unique highest marked node in [u, end_u].
  std::optional<NodeId> highest_marked(NodeId u, NodeId end_u) const {
    NodeId m = next_.at(u);
    if (m == kDummyNode || m > end_u) return std::nullopt;
    return m;
  }
  /// Lowest prime ancestor of u (u itself counts); 0 for the root.
  NodeId lowest_prime(NodeId u) const { return lowest_prime_.at(u); }

  std::uint64_t word_count() const { return list_.size() + 2 * next_.size(); }

  void save(Writer& w) const;
  static MarkedSet load(Reader& r);

 private:
  std::uint64_t g_ = 1;
  std::vector<std::uint8_t> marked_;
  std::vector<NodeId> list_;
  std::vector<NodeId> next_;          // first marked id >= u, or 0
  std::vector<NodeId> lowest_prime_;
};

/// Per marked node, the score of the q-th highest stabbed link for
/// q = 1, 2, 4, ... up to the stabbed count.
class Sketch {
 public:
  Sketch() = default;
  Sketch(const ThresholdIndex& index, const MarkedSet& marks);

  std::span<const Score> entries(NodeId marked) const;
  std::uint64_t stabbed_count(NodeId marked) const;
  std::uint64_t word_count() const { return entries_.size() + 2 * nodes_.size(); }

  void save(Writer& w) const;
  static Sketch load(Reader& r);

 private:
  std::size_t slot(NodeId marked) const;

  std::vector<NodeId> nodes_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint32_t> offsets_;  // nodes_.size() + 1
  std::vector<Score> entries_;
};

struct Threshold {
  Score tau = 1;
  std::uint64_t q = 0;
  NodeId ustar = kDummyNode;
  bool fallback = false;  // no marked descendant: scan with tau = 1
};

/// Picks q = 2^i with 2^(i-1) < k + slack <= 2^i and reads tau off the
/// sketch of u's highest marked descendant.
Threshold threshold_for(const MarkedSet& marks, const Sketch& sketch, NodeId u, NodeId end_u, std::uint64_t k,
                        std::uint64_t slack, IoTape* tape = nullptr);

struct LinkClasses {
  std::vector<LinkId> fringe, near, far, small;
};

/// Splits links originating below prime u' by where origin and target sit
/// relative to the highest marked descendant of u'. Links must be sorted by
/// origin.
LinkClasses classify_links(const TreeShape& tree, std::span<const Link> links, const MarkedSet& marks, NodeId prime);

/// Compacted tree over the candidate links of one prime node: fringe, near
/// and the g best far links. Far targets hang off the dummy.
class CandidateTree {
 public:
  CandidateTree() = default;
  CandidateTree(const TreeShape& tree, const Lca& lca, std::span<const Link> links, const ThresholdIndex& base,
                const MarkedSet& marks, NodeId prime, std::uint64_t block_words);

  NodeId prime() const { return prime_; }
  NodeId ustar() const { return ustar_; }
  bool flat() const { return flat_; }
  /// GST ids of the tree nodes in preorder; local id = position + 1.
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const TreeShape& shape() const { return shape_; }
  const std::vector<Link>& links() const { return links_; }  // local ids
  const std::vector<LinkId>& sources() const { return sources_; }  // global ids
  std::uint32_t fringe_count() const { return fringe_; }
  std::uint32_t near_count() const { return near_; }
  std::uint32_t far_total() const { return far_total_; }
  /// Local id of a GST node, 0 when absent.
  NodeId local(NodeId u) const;

  /// The k best candidate links stabbed by u, unsorted. u must be routed here.
  std::vector<Link> topk(NodeId u, std::uint64_t k, IoTape* tape = nullptr, std::uint64_t* z = nullptr) const;

  std::uint64_t word_count() const;

  void save(Writer& w) const;
  static CandidateTree load(Reader& r);

 private:
  NodeId prime_ = 0;
  NodeId ustar_ = 0;
  bool flat_ = true;
  std::uint32_t fringe_ = 0, near_ = 0, far_total_ = 0;
  std::vector<NodeId> nodes_;
  TreeShape shape_;
  std::vector<Link> links_;
  std::vector<LinkId> sources_;
  ThresholdIndex index_;
  MarkedSet marks_;
  Sketch sketch_;
  std::vector<std::uint32_t> slack_;
};

/// Grouping factor B * log^(b)(n / B), clamped to [1, n].
std::uint64_t grouping_factor(std::uint64_t n, std::uint64_t block_words, unsigned b);
/// Largest level count allowed for n leaves: ceil(log*_2 n), at least 1.
unsigned max_levels(std::uint64_t n);

/// Unsorted top-k over the stabbed links of a node.
class TopKIndex {
 public:
  struct Level {
    std::uint64_t g = 1;
    MarkedSet marks;
    std::vector<NodeId> primes;
    std::vector<CandidateTree> trees;  // parallel to primes
  };

  struct Result {
    std::vector<Link> hits;
    int route = 0;  // 0: base structure, b: candidate tree at level b
    std::uint64_t z = 0;
    Threshold threshold;
  };

  TopKIndex() = default;
  TopKIndex(const GSTree& tree, std::span<const Link> links, std::uint64_t block_words, unsigned levels);

  std::uint64_t block_words() const { return base_.block_words(); }
  std::uint64_t g() const { return base_marks_.g(); }
  unsigned level_count() const { return static_cast<unsigned>(levels_.size()); }
  const Level& level(unsigned b) const { return levels_.at(b - 1); }
  const ThresholdIndex& base() const { return base_; }
  const MarkedSet& base_marks() const { return base_marks_; }
  const Sketch& base_sketch() const { return base_sketch_; }
  const CandidateTree* tree_for(unsigned b, NodeId u) const;

  Result query(NodeId u, std::uint64_t k, IoTape* tape = nullptr) const;
  /// Base path regardless of k.
  Result query_base(NodeId u, std::uint64_t k, IoTape* tape = nullptr) const;

  std::uint64_t base_words() const { return base_.word_count() + base_marks_.word_count() + base_sketch_.word_count(); }
  std::uint64_t level_words(unsigned b) const;
  std::uint64_t word_count() const;

  void save(Writer& w) const;
  static TopKIndex load(Reader& r);

 private:
  ThresholdIndex base_;
  MarkedSet base_marks_;
  Sketch base_sketch_;
  std::vector<Level> levels_;
};

/// Keeps the k highest-scored links (partial selection), unsorted.
void select_top(std::vector<Link>& links, std::uint64_t k);

}  // namespace tkdr

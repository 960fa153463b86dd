#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tkdr/geom.hpp"
#include "tkdr/links.hpp"
#include "tkdr/tree.hpp"

namespace tkdr {

/// A weight-descending stream of (score, link id) items.
using LinkStream = std::function<std::optional<StreamItem>()>;

/// rank(u) = ceil(log2(ceil(size(u) / B))), with 0 for subtrees of at most B
/// leaves. A node shares its rank with at most one child.
unsigned node_rank(std::uint64_t size, std::uint64_t block_words);

/// Threshold engine: reports every link stabbed by u with score >= tau.
///
/// Nodes are grouped by rank into components (bottom subtrees at rank 0,
/// downward paths above). Links whose target shares the query node's
/// component are found by scanning the rank-0 component list or by interval
/// stabbing over pseudo-origins; links of higher rank come from one
/// three-sided query per rank group. Links of lower rank are never read.
///
/// Link ids are indices into the span given at construction. The external
/// flavor keeps a priority search tree per rank group; the RAM flavor keeps
/// an online sorted-range structure instead, for weight-ordered streams.
class ThresholdIndex {
 public:
  enum class Flavor : std::uint8_t { kExternal = 0, kRam = 1 };

  struct Component {
    NodeId top = 0;
    unsigned rank = 0;
    std::vector<NodeId> path;          // rank >= 1: members top-down
    std::uint32_t list_begin = 0;      // rank 0: slice of links by origin
    std::uint32_t list_end = 0;
    PersistentStabbing stabbing;       // rank >= 1: links targeting the path
  };

  /// Which structures a query read; used to audit the low-rank guarantee.
  struct Trace {
    std::uint32_t component = 0;
    std::vector<unsigned> groups;
    std::vector<LinkId> equi;
    std::vector<LinkId> high;
  };

  ThresholdIndex() = default;
  ThresholdIndex(const TreeShape& tree, std::span<const Link> links, std::uint64_t block_words,
                 Flavor flavor = Flavor::kExternal);

  std::uint64_t block_words() const { return block_; }
  Flavor flavor() const { return flavor_; }
  NodeId node_count() const { return static_cast<NodeId>(rank_.size() - 1); }
  std::size_t link_count() const { return links_.size(); }
  const Link& link(LinkId i) const { return links_[i]; }

  NodeId subtree_end(NodeId u) const { return subtree_end_.at(u); }
  const std::vector<NodeId>& parents() const { return parent_; }

  unsigned max_rank() const { return max_rank_; }
  unsigned rank(NodeId u) const { return rank_.at(u); }
  unsigned link_rank(LinkId i) const;
  std::uint32_t component_of(NodeId u) const { return comp_.at(u); }
  const std::vector<Component>& components() const { return components_; }
  /// Links stored in rank group r (r >= 1), in origin order.
  const std::vector<LinkId>& group(unsigned r) const { return groups_.at(r - 1).by_origin; }
  /// Links originating in a rank-0 component.
  std::span<const LinkId> component_list(std::uint32_t c) const;

  /// Lowest ancestor of the link's origin inside the (path) component of its
  /// target.
  NodeId pseudo_origin(LinkId i) const;

  /// Appends ids of links stabbed by u with score >= tau.
  void query(NodeId u, Score tau, std::vector<LinkId>& out, IoTape* tape = nullptr, Trace* trace = nullptr) const;
  std::vector<LinkId> query(NodeId u, Score tau) const {
    std::vector<LinkId> out;
    query(u, tau, out);
    return out;
  }

  /// Weight-descending streams whose union is query(u, tau): at most one
  /// equal-rank stream and one per higher rank group. Requires the RAM flavor
  /// for the rank-group streams.
  std::vector<LinkStream> streams(NodeId u, Score tau) const;

  /// Stored words across all sub-structures.
  std::uint64_t word_count() const;

  void save(Writer& w) const;
  static ThresholdIndex load(Reader& r);

 private:
  struct Group {
    std::vector<LinkId> by_origin;  // OR_r
    RankDict origins;               // multiset of origins
    RankDict scores;                // multiset of scores
    ThreeSided points;              // external: (origin rank, score rank)
    OnlineSortedRange sorted;       // ram: scores in origin order
  };

  bool targets_component(const Link& l, std::uint32_t c) const;
  void build_components();
  void build_groups();

  std::uint64_t block_ = 1;
  Flavor flavor_ = Flavor::kExternal;
  std::vector<Link> links_;
  std::vector<NodeId> parent_;
  std::vector<NodeId> subtree_end_;
  std::vector<std::uint64_t> size_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::uint32_t> comp_;
  unsigned max_rank_ = 0;
  std::vector<LinkId> by_origin_;
  std::vector<Component> components_;
  std::vector<Group> groups_;  // index r - 1
};

}  // namespace tkdr

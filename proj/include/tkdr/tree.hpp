#pragma once

#include <cstdint>
#include <vector>

#include "tkdr/common.hpp"
#include "tkdr/serial.hpp"

namespace tkdr {

/// Preorder-numbered rooted tree. Index 0 is the dummy parent of the root
/// (id 1); every array has node_count() + 1 entries.
struct TreeShape {
  std::vector<NodeId> parent;
  std::vector<NodeId> subtree_end;
  std::vector<std::uint64_t> size;  // leaf count, or another additive weight
  std::vector<std::uint32_t> depth; // nodes on the root path; root = 1

  NodeId node_count() const { return parent.empty() ? 0 : static_cast<NodeId>(parent.size() - 1); }
  bool is_leaf(NodeId u) const { return subtree_end[u] == u; }

  /// a is an ancestor of b or equal to it; the dummy is an ancestor of all.
  bool is_ancestor(NodeId a, NodeId b) const {
    return a == kDummyNode || (a <= b && b <= subtree_end[a]);
  }
  bool is_proper_ancestor(NodeId a, NodeId b) const { return a != b && is_ancestor(a, b); }

  NodeId first_child(NodeId u) const { return u < subtree_end[u] ? u + 1 : kDummyNode; }
  NodeId next_sibling(NodeId c) const {
    NodeId p = parent[c];
    return (p != kDummyNode && subtree_end[c] < subtree_end[p]) ? subtree_end[c] + 1 : kDummyNode;
  }
  std::vector<NodeId> children(NodeId u) const;

  /// Fills subtree_end and depth from parent; parent[c] < c is required.
  void finish_from_parents();

  void save(Writer& w) const;
  static TreeShape load(Reader& r);
};

/// Lowest common ancestor by Euler tour plus sparse-table range minimum.
class Lca {
 public:
  Lca() = default;
  explicit Lca(const TreeShape& tree);

  NodeId operator()(NodeId a, NodeId b) const;

 private:
  std::vector<NodeId> euler_;
  std::vector<std::uint32_t> first_;
  std::vector<std::uint32_t> euler_depth_;
  std::vector<std::vector<std::uint32_t>> table_;  // index into euler_
};

}  // namespace tkdr

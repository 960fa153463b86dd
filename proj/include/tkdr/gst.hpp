#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tkdr/corpus.hpp"
#include "tkdr/io_tape.hpp"
#include "tkdr/tree.hpp"

namespace tkdr {

/// Compacted generalized suffix tree over a terminated document collection.
///
/// Terminators compare as distinct symbols (ordered by document id), so every
/// suffix ends at its own leaf and the leaf count equals the text length.
/// Node ids are preorder; leaves appear in suffix-array order.
class GSTree {
 public:
  GSTree() = default;
  explicit GSTree(const DocumentCollection& collection);

  const TreeShape& shape() const { return shape_; }
  NodeId node_count() const { return shape_.node_count(); }
  std::uint64_t leaf_count() const { return leaves_.size(); }

  NodeId parent(NodeId u) const { return shape_.parent.at(u); }
  std::uint32_t depth(NodeId u) const { return shape_.depth.at(u); }
  std::uint64_t size(NodeId u) const { return shape_.size.at(u); }
  bool is_leaf(NodeId u) const { return shape_.is_leaf(u); }
  /// Length of prefix(u) in bytes.
  std::uint64_t string_depth(NodeId u) const { return string_depth_.at(u); }
  /// Edge label of u as a [start, end) span into the global text.
  std::pair<std::uint64_t, std::uint64_t> edge_label(NodeId u) const;
  std::string prefix(NodeId u) const;

  /// Leaves in left-to-right order (equivalently, the suffix array).
  const std::vector<NodeId>& leaves() const { return leaves_; }
  DocId leaf_doc(NodeId leaf) const { return leaf_doc_.at(leaf); }
  /// Global text offset of the suffix at a leaf.
  std::uint64_t leaf_suffix(NodeId leaf) const { return suffix_pos_.at(leaf); }

  /// Inclusive preorder range of u's subtree.
  std::pair<NodeId, NodeId> subtree_range(NodeId u) const;
  NodeId lca(NodeId a, NodeId b) const;

  /// Highest node whose path label has P as a prefix; absent when P does not
  /// occur. A pattern ending mid-edge resolves to the edge's lower node.
  std::optional<NodeId> locus(std::string_view pattern, IoTape* tape = nullptr) const;
  /// Same node, found as the LCA of the extreme leaves of P's suffix range.
  std::optional<NodeId> locus_by_suffix_range(std::string_view pattern) const;

  std::string_view text() const { return text_; }

  void save(Writer& w) const;
  static GSTree load(Reader& r);

 private:
  void finish();

  std::string text_;
  TreeShape shape_;
  std::vector<std::uint64_t> string_depth_;
  std::vector<std::uint64_t> suffix_pos_;  // leftmost leaf suffix for internal nodes
  std::vector<DocId> leaf_doc_;           // 0 for internal nodes
  std::vector<NodeId> leaves_;
  Lca lca_;
};

/// Blocks charged for a locus search: ceil(p/B) + ceil(log_B n).
std::uint64_t locus_io_charge(std::uint64_t pattern_len, std::uint64_t n, std::uint64_t block_words);

}  // namespace tkdr

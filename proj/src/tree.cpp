#include "tkdr/tree.hpp"

#include <algorithm>

namespace tkdr {

std::vector<NodeId> TreeShape::children(NodeId u) const {
  std::vector<NodeId> out;
  for (NodeId c = first_child(u); c != kDummyNode; c = next_sibling(c)) out.push_back(c);
  return out;
}

void TreeShape::finish_from_parents() {
  const NodeId m = node_count();
  subtree_end.assign(m + 1, 0);
  depth.assign(m + 1, 0);
  for (NodeId u = 1; u <= m; ++u) {
    subtree_end[u] = u;
    depth[u] = parent[u] == kDummyNode ? 1 : depth[parent[u]] + 1;
  }
  for (NodeId u = m; u >= 2; --u) {
    NodeId p = parent[u];
    if (p != kDummyNode) subtree_end[p] = std::max(subtree_end[p], subtree_end[u]);
  }
  if (m > 0) subtree_end[0] = m;
}

void TreeShape::save(Writer& w) const {
  w.put_vec(parent);
  w.put_vec(size);
}

TreeShape TreeShape::load(Reader& r) {
  TreeShape t;
  t.parent = r.get_vec<NodeId>();
  t.size = r.get_vec<std::uint64_t>();
  if (t.size.size() != t.parent.size()) throw Error(ErrorCode::kCorrupt, "tree arrays disagree");
  for (NodeId u = 1; u < t.parent.size(); ++u) {
    if (t.parent[u] >= u) throw Error(ErrorCode::kCorrupt, "tree parent order");
  }
  t.finish_from_parents();
  return t;
}

Lca::Lca(const TreeShape& tree) {
  const NodeId m = tree.node_count();
  if (m == 0) return;
  first_.assign(m + 1, 0);
  euler_.reserve(2 * m);
  // Iterative Euler tour; preorder ids make the child order implicit.
  std::vector<NodeId> stack{kRootNode};
  std::vector<NodeId> next_child{tree.first_child(kRootNode)};
  first_[kRootNode] = 0;
  euler_.push_back(kRootNode);
  while (!stack.empty()) {
    NodeId& c = next_child.back();
    if (c != kDummyNode) {
      NodeId child = c;
      c = tree.next_sibling(child);
      first_[child] = static_cast<std::uint32_t>(euler_.size());
      euler_.push_back(child);
      stack.push_back(child);
      next_child.push_back(tree.first_child(child));
    } else {
      stack.pop_back();
      next_child.pop_back();
      if (!stack.empty()) euler_.push_back(stack.back());
    }
  }
  euler_depth_.resize(euler_.size());
  for (std::size_t i = 0; i < euler_.size(); ++i) euler_depth_[i] = tree.depth[euler_[i]];

  const std::size_t len = euler_.size();
  const unsigned levels = floor_log2(len) + 1;
  table_.resize(levels);
  table_[0].resize(len);
  for (std::size_t i = 0; i < len; ++i) table_[0][i] = static_cast<std::uint32_t>(i);
  for (unsigned l = 1; l < levels; ++l) {
    const std::size_t span = std::size_t{1} << l;
    table_[l].resize(len - span + 1);
    for (std::size_t i = 0; i + span <= len; ++i) {
      auto a = table_[l - 1][i];
      auto b = table_[l - 1][i + span / 2];
      table_[l][i] = euler_depth_[a] <= euler_depth_[b] ? a : b;
    }
  }
}

NodeId Lca::operator()(NodeId a, NodeId b) const {
  if (a == kDummyNode || b == kDummyNode) return kDummyNode;
  auto i = first_.at(a);
  auto j = first_.at(b);
  if (i > j) std::swap(i, j);
  unsigned l = floor_log2(j - i + 1);
  auto x = table_[l][i];
  auto y = table_[l][j + 1 - (std::size_t{1} << l)];
  return euler_[euler_depth_[x] <= euler_depth_[y] ? x : y];
}

}  // namespace tkdr

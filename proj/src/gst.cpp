#include "tkdr/gst.hpp"

#include <algorithm>
#include <numeric>

namespace tkdr {

namespace {

// Prefix-doubling suffix sort over an integer alphabet with unique sentinels.
std::vector<std::uint32_t> suffix_array(const std::vector<std::uint32_t>& s) {
  const std::size_t n = s.size();
  std::vector<std::uint32_t> sa(n), rank(s.begin(), s.end()), tmp(n);
  std::iota(sa.begin(), sa.end(), 0);
  for (std::size_t k = 1;; k <<= 1) {
    auto key = [&](std::uint32_t i) {
      std::int64_t second = i + k < n ? static_cast<std::int64_t>(rank[i + k]) : -1;
      return std::pair<std::int64_t, std::int64_t>(rank[i], second);
    };
    std::sort(sa.begin(), sa.end(), [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });
    tmp[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) tmp[sa[i]] = tmp[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
    rank.swap(tmp);
    if (rank[sa[n - 1]] == n - 1) break;
  }
  return sa;
}

// Kasai; lcp[i] = lcp(sa[i-1], sa[i]), lcp[0] = 0.
std::vector<std::uint64_t> lcp_array(const std::vector<std::uint32_t>& s, const std::vector<std::uint32_t>& sa) {
  const std::size_t n = s.size();
  std::vector<std::uint32_t> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[sa[i]] = static_cast<std::uint32_t>(i);
  std::vector<std::uint64_t> lcp(n, 0);
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inv[i] == 0) {
      h = 0;
      continue;
    }
    std::size_t j = sa[inv[i] - 1];
    while (i + h < n && j + h < n && s[i + h] == s[j + h]) ++h;
    lcp[inv[i]] = h;
    if (h > 0) --h;
  }
  return lcp;
}

struct RawNode {
  std::uint64_t string_depth = 0;
  std::int64_t suffix = -1;  // leaf only
  std::vector<std::uint32_t> children;
};

}  // namespace

GSTree::GSTree(const DocumentCollection& collection) : text_(collection.text()) {
  const std::size_t n = text_.size();
  const auto docs = static_cast<std::uint32_t>(collection.doc_count());
  std::vector<std::uint32_t> s(n);
  std::vector<std::uint64_t> term_pos(n);  // offset of the terminator ending each suffix
  {
    std::uint32_t doc = 1;
    for (std::size_t i = 0; i < n; ++i) {
      auto c = static_cast<unsigned char>(text_[i]);
      s[i] = c == kTerminator ? doc++ : docs + 1 + c;
    }
    std::uint64_t next_term = n;
    for (std::size_t i = n; i-- > 0;) {
      if (static_cast<unsigned char>(text_[i]) == kTerminator) next_term = i;
      term_pos[i] = next_term;
    }
  }
  const auto sa = suffix_array(s);
  const auto lcp = lcp_array(s, sa);

  std::vector<RawNode> raw;
  raw.reserve(2 * n);
  auto make_leaf = [&](std::uint32_t pos) {
    raw.push_back(RawNode{term_pos[pos] - pos + 1, pos, {}});
    return static_cast<std::uint32_t>(raw.size() - 1);
  };
  std::vector<std::uint32_t> stack;
  raw.push_back(RawNode{0, -1, {}});
  stack.push_back(0);
  std::uint32_t pending = make_leaf(sa[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const std::uint64_t h = lcp[i];
    while (raw[stack.back()].string_depth > h) {
      std::uint32_t top = stack.back();
      stack.pop_back();
      raw[top].children.push_back(pending);
      pending = top;
    }
    if (raw[stack.back()].string_depth < h) {
      raw.push_back(RawNode{h, -1, {pending}});
      stack.push_back(static_cast<std::uint32_t>(raw.size() - 1));
    } else {
      raw[stack.back()].children.push_back(pending);
    }
    pending = make_leaf(sa[i]);
  }
  while (!stack.empty()) {
    std::uint32_t top = stack.back();
    stack.pop_back();
    raw[top].children.push_back(pending);
    pending = top;
  }

  // Preorder numbering.
  const std::size_t m = raw.size();
  shape_.parent.assign(m + 1, 0);
  shape_.size.assign(m + 1, 0);
  string_depth_.assign(m + 1, 0);
  suffix_pos_.assign(m + 1, 0);
  leaf_doc_.assign(m + 1, 0);
  NodeId next_id = 1;
  std::vector<std::pair<std::uint32_t, NodeId>> work{{pending, kDummyNode}};
  while (!work.empty()) {
    auto [r, par] = work.back();
    work.pop_back();
    NodeId id = next_id++;
    shape_.parent[id] = par;
    string_depth_[id] = raw[r].string_depth;
    if (raw[r].suffix >= 0) {
      suffix_pos_[id] = static_cast<std::uint64_t>(raw[r].suffix);
      leaf_doc_[id] = collection.doc_at(suffix_pos_[id]);
      leaves_.push_back(id);
    }
    for (auto it = raw[r].children.rbegin(); it != raw[r].children.rend(); ++it) work.emplace_back(*it, id);
  }
  shape_.finish_from_parents();
  for (NodeId u = static_cast<NodeId>(m); u >= 1; --u) {
    if (shape_.is_leaf(u)) shape_.size[u] = 1;
    NodeId p = shape_.parent[u];
    if (p != kDummyNode) shape_.size[p] += shape_.size[u];
    // leftmost leaf; u + 1 is the first child and already final
    if (!shape_.is_leaf(u)) suffix_pos_[u] = suffix_pos_[u + 1];
  }
  lca_ = Lca(shape_);
}

void GSTree::finish() { lca_ = Lca(shape_); }

std::pair<std::uint64_t, std::uint64_t> GSTree::edge_label(NodeId u) const {
  if (u == kRootNode) return {suffix_pos_[u], suffix_pos_[u]};
  NodeId p = parent(u);
  return {suffix_pos_[u] + string_depth_[p], suffix_pos_[u] + string_depth_[u]};
}

std::string GSTree::prefix(NodeId u) const { return text_.substr(suffix_pos_.at(u), string_depth_.at(u)); }

std::pair<NodeId, NodeId> GSTree::subtree_range(NodeId u) const {
  if (u == kDummyNode || u > node_count()) throw Error(ErrorCode::kOutOfRange, "invalid node id");
  return {u, shape_.subtree_end[u]};
}

NodeId GSTree::lca(NodeId a, NodeId b) const {
  if (a > node_count() || b > node_count()) throw Error(ErrorCode::kOutOfRange, "invalid node id");
  return lca_(a, b);
}

std::uint64_t locus_io_charge(std::uint64_t pattern_len, std::uint64_t n, std::uint64_t block_words) {
  const std::uint64_t b = block_words ? block_words : 1;
  std::uint64_t log_term = 0;
  if (b == 1) {
    log_term = ceil_log2(n);
  } else {
    for (std::uint64_t reach = 1; reach < n; reach *= b) ++log_term;
  }
  return (pattern_len + b - 1) / b + log_term;
}

std::optional<NodeId> GSTree::locus(std::string_view pattern, IoTape* tape) const {
  if (pattern.empty()) throw Error(ErrorCode::kInvalidArgument, "empty pattern");
  if (tape) tape->charge(Phase::kLocus, locus_io_charge(pattern.size(), text_.size(), tape->block_words()));
  NodeId u = kRootNode;
  std::uint64_t matched = 0;
  while (matched < pattern.size()) {
    NodeId next = kDummyNode;
    for (NodeId c = shape_.first_child(u); c != kDummyNode; c = shape_.next_sibling(c)) {
      if (text_[suffix_pos_[c] + string_depth_[u]] == pattern[matched]) {
        next = c;
        break;
      }
    }
    if (next == kDummyNode) return std::nullopt;
    const std::uint64_t stop = std::min<std::uint64_t>(string_depth_[next], pattern.size());
    for (std::uint64_t j = matched; j < stop; ++j) {
      if (text_[suffix_pos_[next] + j] != pattern[j]) return std::nullopt;
    }
    matched = stop;
    u = next;
  }
  return u;
}

std::optional<NodeId> GSTree::locus_by_suffix_range(std::string_view pattern) const {
  if (pattern.empty()) throw Error(ErrorCode::kInvalidArgument, "empty pattern");
  if (pattern.find(static_cast<char>(kTerminator)) != std::string_view::npos) return std::nullopt;
  auto head = [&](NodeId leaf) { return std::string_view(text_).substr(suffix_pos_[leaf], pattern.size()); };
  auto lo = std::lower_bound(leaves_.begin(), leaves_.end(), pattern,
                             [&](NodeId leaf, std::string_view p) { return head(leaf) < p; });
  auto hi = std::upper_bound(leaves_.begin(), leaves_.end(), pattern,
                             [&](std::string_view p, NodeId leaf) { return p < head(leaf); });
  if (lo == hi) return std::nullopt;
  return lca_(*lo, *(hi - 1));
}

void GSTree::save(Writer& w) const {
  w.put_bytes(text_);
  shape_.save(w);
  w.put_vec(string_depth_);
  w.put_vec(suffix_pos_);
  w.put_vec(leaf_doc_);
}

GSTree GSTree::load(Reader& r) {
  GSTree t;
  t.text_ = r.get_bytes();
  t.shape_ = TreeShape::load(r);
  t.string_depth_ = r.get_vec<std::uint64_t>();
  t.suffix_pos_ = r.get_vec<std::uint64_t>();
  t.leaf_doc_ = r.get_vec<DocId>();
  const auto m = t.shape_.parent.size();
  if (t.string_depth_.size() != m || t.suffix_pos_.size() != m || t.leaf_doc_.size() != m) {
    throw Error(ErrorCode::kCorrupt, "tree arrays disagree");
  }
  for (NodeId u = 1; u < m; ++u) {
    if (t.shape_.is_leaf(u)) t.leaves_.push_back(u);
  }
  t.finish();
  return t;
}

}  // namespace tkdr

#include "tkdr/topk.hpp"

#include <algorithm>
#include <cmath>

#include "tkdr/gst.hpp"

namespace tkdr {

namespace {

constexpr std::uint64_t kLinkWords = 3;

std::pair<std::size_t, std::size_t> origin_range(std::span<const Link> links, NodeId lo, NodeId hi) {
  auto cmp_lo = [](const Link& l, NodeId v) { return l.origin < v; };
  auto cmp_hi = [](NodeId v, const Link& l) { return v < l.origin; };
  auto a = std::lower_bound(links.begin(), links.end(), lo, cmp_lo);
  auto b = std::upper_bound(a, links.end(), hi, cmp_hi);
  return {static_cast<std::size_t>(a - links.begin()), static_cast<std::size_t>(b - links.begin())};
}

std::uint64_t ceil_log_base(std::uint64_t n, std::uint64_t b) {
  if (n <= 1) return 1;
  if (b <= 1) return ceil_log2(n);
  std::uint64_t r = 0;
  for (std::uint64_t p = 1; p < n; ++r) p = p > n / b ? n : p * b;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

MarkedSet::MarkedSet(const TreeShape& tree, const Lca& lca, std::uint64_t g) : g_(g) {
  const NodeId m = tree.node_count();
  std::vector<NodeId> leaves;
  for (NodeId u = 1; u <= m; ++u) {
    if (tree.is_leaf(u)) leaves.push_back(u);
  }
  if (g < 1 || (m > 0 && g > leaves.size())) throw Error(ErrorCode::kInvalidArgument, "grouping factor out of range");
  std::vector<NodeId> picks;
  if (m > 0) picks.push_back(kRootNode);
  for (std::size_t i = 0; i < leaves.size(); i += g) {
    std::size_t j = std::min(leaves.size(), i + g) - 1;
    picks.push_back(lca(leaves[i], leaves[j]));
  }
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  const std::size_t base = picks.size();
  for (std::size_t i = 0; i + 1 < base; ++i) picks.push_back(lca(picks[i], picks[i + 1]));
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  list_ = std::move(picks);

  marked_.assign(m + 1, 0);
  for (NodeId u : list_) marked_[u] = 1;
  next_.assign(m + 2, kDummyNode);
  for (NodeId u = m; u >= 1; --u) next_[u] = marked_[u] ? u : next_[u + 1];
  next_.pop_back();
  lowest_prime_.assign(m + 1, kDummyNode);
  for (NodeId u = 2; u <= m; ++u) {
    const NodeId p = tree.parent[u];
    lowest_prime_[u] = marked_[p] ? u : lowest_prime_[p];
  }
}

std::vector<NodeId> MarkedSet::prime_nodes() const {
  std::vector<NodeId> out;
  for (NodeId u = 1; u < lowest_prime_.size(); ++u) {
    if (lowest_prime_[u] == u) out.push_back(u);
  }
  return out;
}

void MarkedSet::save(Writer& w) const {
  w.put<std::uint64_t>(g_);
  w.put_vec(marked_);
  w.put_vec(list_);
  w.put_vec(next_);
  w.put_vec(lowest_prime_);
}

MarkedSet MarkedSet::load(Reader& r) {
  MarkedSet s;
  s.g_ = r.get<std::uint64_t>();
  s.marked_ = r.get_vec<std::uint8_t>();
  s.list_ = r.get_vec<NodeId>();
  s.next_ = r.get_vec<NodeId>();
  s.lowest_prime_ = r.get_vec<NodeId>();
  const auto m = s.marked_.size();
  if (s.next_.size() != m || s.lowest_prime_.size() != m) throw Error(ErrorCode::kCorrupt, "marked set arrays");
  for (NodeId u : s.list_) {
    if (u >= m) throw Error(ErrorCode::kCorrupt, "marked set arrays");
  }
  for (std::size_t u = 0; u < m; ++u) {
    if (s.next_[u] >= m || s.lowest_prime_[u] > u) throw Error(ErrorCode::kCorrupt, "marked set arrays");
  }
  return s;
}

// ---------------------------------------------------------------------------

Sketch::Sketch(const ThresholdIndex& index, const MarkedSet& marks) {
  nodes_ = marks.marked_nodes();
  offsets_.push_back(0);
  std::vector<LinkId> ids;
  std::vector<Score> scores;
  for (NodeId u : nodes_) {
    ids.clear();
    index.query(u, 1, ids);
    scores.clear();
    for (LinkId i : ids) scores.push_back(index.link(i).score);
    std::sort(scores.begin(), scores.end(), std::greater<>());
    counts_.push_back(scores.size());
    for (std::size_t q = 1; q <= scores.size(); q *= 2) entries_.push_back(scores[q - 1]);
    offsets_.push_back(static_cast<std::uint32_t>(entries_.size()));
  }
}

std::size_t Sketch::slot(NodeId marked) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), marked);
  if (it == nodes_.end() || *it != marked) throw Error(ErrorCode::kInvalidArgument, "node is not marked");
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::span<const Score> Sketch::entries(NodeId marked) const {
  const auto s = slot(marked);
  return std::span<const Score>(entries_).subspan(offsets_[s], offsets_[s + 1] - offsets_[s]);
}

std::uint64_t Sketch::stabbed_count(NodeId marked) const { return counts_[slot(marked)]; }

void Sketch::save(Writer& w) const {
  w.put_vec(nodes_);
  w.put_vec(counts_);
  w.put_vec(offsets_);
  w.put_vec(entries_);
}

Sketch Sketch::load(Reader& r) {
  Sketch s;
  s.nodes_ = r.get_vec<NodeId>();
  s.counts_ = r.get_vec<std::uint64_t>();
  s.offsets_ = r.get_vec<std::uint32_t>();
  s.entries_ = r.get_vec<Score>();
  if (s.counts_.size() != s.nodes_.size() || s.offsets_.size() != s.nodes_.size() + 1 ||
      s.offsets_.back() != s.entries_.size() || !std::is_sorted(s.offsets_.begin(), s.offsets_.end())) {
    throw Error(ErrorCode::kCorrupt, "sketch arrays");
  }
  return s;
}

// ---------------------------------------------------------------------------

Threshold threshold_for(const MarkedSet& marks, const Sketch& sketch, NodeId u, NodeId end_u, std::uint64_t k,
                        std::uint64_t slack, IoTape* tape) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  Threshold t;
  if (tape) tape->charge(Phase::kConversion, 1);
  auto ustar = marks.highest_marked(u, end_u);
  if (!ustar) {
    t.fallback = true;
    return t;
  }
  t.ustar = *ustar;
  const unsigned i = ceil_log2(k + slack);
  t.q = std::uint64_t{1} << i;
  if (tape) tape->charge(Phase::kConversion, 1);
  auto e = sketch.entries(*ustar);
  t.tau = i < e.size() ? e[i] : 1;
  return t;
}

LinkClasses classify_links(const TreeShape& tree, std::span<const Link> links, const MarkedSet& marks, NodeId prime) {
  if (!marks.is_prime(prime)) throw Error(ErrorCode::kInvalidArgument, "node is not prime");
  LinkClasses c;
  const NodeId end = tree.subtree_end[prime];
  auto ustar = marks.highest_marked(prime, end);
  auto [a, b] = origin_range(links, prime, end);
  for (std::size_t i = a; i < b; ++i) {
    const Link& l = links[i];
    const auto id = static_cast<LinkId>(i);
    if (!ustar || !tree.is_ancestor(*ustar, l.origin)) c.fringe.push_back(id);
    else if (l.target >= *ustar) c.small.push_back(id);
    else if (l.target >= prime) c.near.push_back(id);
    else c.far.push_back(id);
  }
  return c;
}

// ---------------------------------------------------------------------------

CandidateTree::CandidateTree(const TreeShape& tree, const Lca& lca, std::span<const Link> links,
                             const ThresholdIndex& base, const MarkedSet& marks, NodeId prime,
                             std::uint64_t block_words)
    : prime_(prime) {
  if (!marks.is_prime(prime)) throw Error(ErrorCode::kInvalidArgument, "node is not prime");
  const NodeId end = tree.subtree_end[prime];
  const auto ustar = marks.highest_marked(prime, end);
  ustar_ = ustar.value_or(kDummyNode);
  const NodeId ustar_end = ustar ? tree.subtree_end[*ustar] : kDummyNode;

  auto add_range = [&](NodeId lo, NodeId hi) {
    if (lo > hi) return;
    auto [a, b] = origin_range(links, lo, hi);
    for (std::size_t i = a; i < b; ++i) sources_.push_back(static_cast<LinkId>(i));
  };
  if (!ustar) {
    add_range(prime, end);
  } else {
    add_range(prime, *ustar - 1);
    add_range(ustar_end + 1, end);
  }
  fringe_ = static_cast<std::uint32_t>(sources_.size());
  if (ustar) {
    std::vector<LinkId> stabbed, far;
    base.query(*ustar, 1, stabbed);
    for (LinkId i : stabbed) {
      if (links[i].target >= prime) sources_.push_back(i); else far.push_back(i);
    }
    near_ = static_cast<std::uint32_t>(sources_.size()) - fringe_;
    far_total_ = static_cast<std::uint32_t>(far.size());
    const std::size_t keep = std::min<std::size_t>(far.size(), marks.g());
    std::nth_element(far.begin(), far.begin() + static_cast<std::ptrdiff_t>(keep), far.end(),
                     [&](LinkId a, LinkId b) { return links[a].score > links[b].score; });
    sources_.insert(sources_.end(), far.begin(), far.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  // global ids follow origin order, and so do the local ids
  std::sort(sources_.begin(), sources_.end());

  // Steiner nodes: the fringe region, u*, and every endpoint inside subtree(u')
  std::vector<NodeId> pts;
  for (NodeId v = prime; v <= end; ++v) {
    if (ustar && v >= *ustar && v <= ustar_end) {
      v = ustar_end;
      continue;
    }
    pts.push_back(v);
  }
  if (ustar) pts.push_back(*ustar);
  for (LinkId i : sources_) {
    pts.push_back(links[i].origin);
    if (links[i].target >= prime) pts.push_back(links[i].target);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t base_count = pts.size();
  for (std::size_t i = 0; i + 1 < base_count; ++i) pts.push_back(lca(pts[i], pts[i + 1]));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  nodes_ = std::move(pts);

  const auto m = static_cast<NodeId>(nodes_.size());
  shape_.parent.assign(m + 1, kDummyNode);
  std::vector<NodeId> stack;
  for (NodeId i = 1; i <= m; ++i) {
    const NodeId v = nodes_[i - 1];
    while (!stack.empty() && tree.subtree_end[nodes_[stack.back() - 1]] < v) stack.pop_back();
    shape_.parent[i] = stack.empty() ? kDummyNode : stack.back();
    stack.push_back(i);
  }
  shape_.finish_from_parents();

  links_.reserve(sources_.size());
  shape_.size.assign(m + 1, 0);
  for (LinkId i : sources_) {
    Link l = links[i];
    l.origin = local(l.origin);
    l.target = l.target >= prime ? local(l.target) : kDummyNode;
    shape_.size[l.origin] += 1;
    links_.push_back(l);
  }
  for (NodeId i = m; i >= 2; --i) shape_.size[shape_.parent[i]] += shape_.size[i];

  flat_ = links_.size() <= 4 * block_words;
  if (flat_) return;

  // the nested index works in local rank space; ids still line up with links_
  std::vector<Link> ranked = links_;
  {
    std::vector<LinkId> order(ranked.size());
    for (LinkId i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](LinkId a, LinkId b) { return links_[a].score < links_[b].score; });
    for (LinkId r = 0; r < order.size(); ++r) ranked[order[r]].score = static_cast<Score>(r + 1);
  }
  index_ = ThresholdIndex(shape_, ranked, block_words);
  const std::uint64_t leaves = [&] {
    std::uint64_t c = 0;
    for (NodeId i = 1; i <= m; ++i) c += shape_.is_leaf(i);
    return c;
  }();
  const std::uint64_t g = std::min<std::uint64_t>(leaves, grouping_factor(links_.size(), block_words, 1));
  marks_ = MarkedSet(shape_, Lca(shape_), std::max<std::uint64_t>(1, g));
  sketch_ = Sketch(index_, marks_);

  // links stabbed by u*_ct that u itself loses: their targets lie in [u, u*_ct)
  slack_.assign(m + 1, 0);
  std::vector<Score> targets;
  NodeId cached = kDummyNode;
  std::vector<LinkId> ids;
  for (NodeId u = 1; u <= m; ++u) {
    auto s = marks_.highest_marked(u, shape_.subtree_end[u]);
    if (!s || *s == u) continue;
    if (*s != cached) {
      ids.clear();
      index_.query(*s, 1, ids);
      targets.clear();
      for (LinkId i : ids) targets.push_back(links_[i].target);
      std::sort(targets.begin(), targets.end());
      cached = *s;
    }
    slack_[u] = static_cast<std::uint32_t>(targets.end() - std::lower_bound(targets.begin(), targets.end(), u));
  }
}

NodeId CandidateTree::local(NodeId u) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), u);
  if (it == nodes_.end() || *it != u) return kDummyNode;
  return static_cast<NodeId>(it - nodes_.begin() + 1);
}

std::vector<Link> CandidateTree::topk(NodeId u, std::uint64_t k, IoTape* tape, std::uint64_t* z) const {
  if (tape) tape->charge(Phase::kConversion, ceil_log_base(nodes_.size(), tape->block_words()));
  const NodeId lu = local(u);
  if (lu == kDummyNode) throw Error(ErrorCode::kInvalidArgument, "node not routed to this candidate tree");
  const NodeId lend = shape_.subtree_end[lu];
  std::vector<Link> out;
  if (flat_) {
    if (tape) tape->charge_scan(Phase::kEqui, kLinkWords * links_.size());
    for (const Link& l : links_) {
      if (l.origin >= lu && l.origin <= lend && l.target < lu) out.push_back(l);
    }
  } else {
    auto t = threshold_for(marks_, sketch_, lu, lend, k, slack_[lu], tape);
    std::vector<LinkId> ids;
    index_.query(lu, t.tau, ids, tape);
    out.reserve(ids.size());
    for (LinkId i : ids) out.push_back(links_[i]);
  }
  if (z) *z = out.size();
  if (tape) tape->charge_scan(Phase::kSelection, kLinkWords * out.size());
  select_top(out, k);
  return out;
}

std::uint64_t CandidateTree::word_count() const {
  std::uint64_t w = 8 + nodes_.size() + 2 * shape_.parent.size() + kLinkWords * links_.size() + sources_.size();
  if (!flat_) w += index_.word_count() + marks_.word_count() + sketch_.word_count() + slack_.size();
  return w;
}

void CandidateTree::save(Writer& w) const {
  w.put(prime_);
  w.put(ustar_);
  w.put<std::uint8_t>(flat_);
  w.put(fringe_);
  w.put(near_);
  w.put(far_total_);
  w.put_vec(nodes_);
  shape_.save(w);
  save_links(w, links_);
  w.put_vec(sources_);
  if (!flat_) {
    index_.save(w);
    marks_.save(w);
    sketch_.save(w);
    w.put_vec(slack_);
  }
}

CandidateTree CandidateTree::load(Reader& r) {
  CandidateTree t;
  t.prime_ = r.get<NodeId>();
  t.ustar_ = r.get<NodeId>();
  t.flat_ = r.get<std::uint8_t>() != 0;
  t.fringe_ = r.get<std::uint32_t>();
  t.near_ = r.get<std::uint32_t>();
  t.far_total_ = r.get<std::uint32_t>();
  t.nodes_ = r.get_vec<NodeId>();
  t.shape_ = TreeShape::load(r);
  t.links_ = load_links(r);
  t.sources_ = r.get_vec<LinkId>();
  if (t.shape_.node_count() != t.nodes_.size() || t.sources_.size() != t.links_.size()) {
    throw Error(ErrorCode::kCorrupt, "candidate tree arrays");
  }
  if (!t.flat_) {
    t.index_ = ThresholdIndex::load(r);
    t.marks_ = MarkedSet::load(r);
    t.sketch_ = Sketch::load(r);
    t.slack_ = r.get_vec<std::uint32_t>();
    if (t.slack_.size() != t.nodes_.size() + 1) throw Error(ErrorCode::kCorrupt, "candidate tree arrays");
  }
  return t;
}

// ---------------------------------------------------------------------------

std::uint64_t grouping_factor(std::uint64_t n, std::uint64_t block_words, unsigned b) {
  if (n == 0) return 1;
  const double B = static_cast<double>(std::max<std::uint64_t>(block_words, 1));
  double v = static_cast<double>(n) / B;
  for (unsigned i = 0; i < b; ++i) v = v > 1.0 ? std::log2(v) : 0.0;
  const double g = std::floor(B * v);
  if (g < 1.0) return 1;
  return std::min<std::uint64_t>(n, static_cast<std::uint64_t>(g));
}

unsigned max_levels(std::uint64_t n) {
  unsigned s = 0;
  double v = static_cast<double>(n);
  while (v > 1.0) {
    v = std::log2(v);
    ++s;
  }
  return std::max(1u, s);
}

void select_top(std::vector<Link>& links, std::uint64_t k) {
  if (links.size() <= k) return;
  std::nth_element(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(k), links.end(),
                   [](const Link& a, const Link& b) { return a.score > b.score; });
  links.resize(k);
}

TopKIndex::TopKIndex(const GSTree& tree, std::span<const Link> links, std::uint64_t block_words, unsigned levels) {
  const std::uint64_t n = tree.leaf_count();
  if (levels < 1 || levels > max_levels(n)) throw Error(ErrorCode::kInvalidArgument, "level count out of range");
  const auto& shape = tree.shape();
  Lca lca(shape);
  base_ = ThresholdIndex(shape, links, block_words);
  base_marks_ = MarkedSet(shape, lca, grouping_factor(n, block_words, 1));
  base_sketch_ = Sketch(base_, base_marks_);
  for (unsigned b = 1; b <= levels; ++b) {
    Level lv;
    lv.g = grouping_factor(n, block_words, b);
    lv.marks = b == 1 ? base_marks_ : MarkedSet(shape, lca, lv.g);
    lv.primes = lv.marks.prime_nodes();
    lv.trees.reserve(lv.primes.size());
    for (NodeId p : lv.primes) lv.trees.emplace_back(shape, lca, links, base_, lv.marks, p, block_words);
    levels_.push_back(std::move(lv));
  }
}

const CandidateTree* TopKIndex::tree_for(unsigned b, NodeId u) const {
  const Level& lv = level(b);
  const NodeId p = lv.marks.lowest_prime(u);
  if (p == kDummyNode) return nullptr;
  auto it = std::lower_bound(lv.primes.begin(), lv.primes.end(), p);
  return &lv.trees[static_cast<std::size_t>(it - lv.primes.begin())];
}

TopKIndex::Result TopKIndex::query_base(NodeId u, std::uint64_t k, IoTape* tape) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  Result res;
  const NodeId end = base_.subtree_end(u);
  res.threshold = threshold_for(base_marks_, base_sketch_, u, end, k, 2 * g(), tape);
  std::vector<LinkId> ids;
  base_.query(u, res.threshold.tau, ids, tape);
  res.z = ids.size();
  res.hits.reserve(ids.size());
  for (LinkId i : ids) res.hits.push_back(base_.link(i));
  if (tape) tape->charge_scan(Phase::kSelection, kLinkWords * ids.size());
  select_top(res.hits, k);
  return res;
}

TopKIndex::Result TopKIndex::query(NodeId u, std::uint64_t k, IoTape* tape) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (u == kDummyNode || u > base_.node_count()) throw Error(ErrorCode::kOutOfRange, "invalid node id");
  unsigned b = 0;
  for (unsigned i = 1; i <= levels_.size(); ++i) {
    if (k < g() && k <= levels_[i - 1].g) b = i;
  }
  const CandidateTree* ct = b ? tree_for(b, u) : nullptr;
  if (!ct) return query_base(u, k, tape);
  if (tape) tape->charge(Phase::kConversion, 1);
  Result res;
  res.route = static_cast<int>(b);
  res.hits = ct->topk(u, k, tape, &res.z);
  return res;
}

std::uint64_t TopKIndex::level_words(unsigned b) const {
  const Level& lv = level(b);
  std::uint64_t w = lv.primes.size() + (b == 1 ? 0 : lv.marks.word_count());
  for (const auto& t : lv.trees) w += t.word_count();
  return w;
}

std::uint64_t TopKIndex::word_count() const {
  std::uint64_t w = base_words();
  for (unsigned b = 1; b <= levels_.size(); ++b) w += level_words(b);
  return w;
}

void TopKIndex::save(Writer& w) const {
  base_.save(w);
  base_marks_.save(w);
  base_sketch_.save(w);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(levels_.size()));
  for (std::size_t b = 0; b < levels_.size(); ++b) {
    const Level& lv = levels_[b];
    w.put<std::uint64_t>(lv.g);
    if (b > 0) lv.marks.save(w);
    w.put_vec(lv.primes);
    for (const auto& t : lv.trees) t.save(w);
  }
}

TopKIndex TopKIndex::load(Reader& r) {
  TopKIndex t;
  t.base_ = ThresholdIndex::load(r);
  t.base_marks_ = MarkedSet::load(r);
  t.base_sketch_ = Sketch::load(r);
  const auto levels = r.get<std::uint32_t>();
  if (levels > 64) throw Error(ErrorCode::kCorrupt, "level count");
  for (std::uint32_t b = 0; b < levels; ++b) {
    Level lv;
    lv.g = r.get<std::uint64_t>();
    lv.marks = b == 0 ? t.base_marks_ : MarkedSet::load(r);
    lv.primes = r.get_vec<NodeId>();
    for (std::size_t i = 0; i < lv.primes.size(); ++i) lv.trees.push_back(CandidateTree::load(r));
    t.levels_.push_back(std::move(lv));
  }
  return t;
}

}  // namespace tkdr

#include "tkdr/ram.hpp"

#include <algorithm>
#include <queue>

#include "tkdr/gst.hpp"

namespace tkdr {

std::vector<StreamItem> merge_streams(std::vector<LinkStream>& streams, std::uint64_t k, MergeStats* stats) {
  struct Head {
    StreamItem item;
    std::size_t src;
    bool operator<(const Head& o) const { return item.score < o.item.score; }
  };
  std::priority_queue<Head> heap;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (auto it = streams[i]()) heap.push(Head{*it, i});
  }
  if (stats) stats->streams += streams.size();
  std::vector<StreamItem> out;
  while (out.size() < k && !heap.empty()) {
    Head h = heap.top();
    heap.pop();
    if (stats) ++stats->pops;
    out.push_back(h.item);
    if (out.size() == k) break;
    if (auto it = streams[h.src]()) {
      if (it->score > h.item.score) throw Error(ErrorCode::kInvalidArgument, "unsorted stream");
      heap.push(Head{*it, h.src});
    }
  }
  return out;
}

RamIndex::RamIndex(const GSTree& tree, std::span<const Link> links) {
  const auto& sh = tree.shape();
  const NodeId m = tree.node_count();
  Lca lca(sh);
  base_ = ThresholdIndex(sh, links, 1, ThresholdIndex::Flavor::kRam);
  marks_ = MarkedSet(sh, lca, grouping_factor(tree.leaf_count(), 1, 1));
  sketch_ = Sketch(base_, marks_);
  primes_ = marks_.prime_nodes();

  // flat candidate trees: only the candidate set and local shape are kept
  constexpr std::uint64_t kFlatBlock = std::uint64_t{1} << 40;
  std::vector<CandidateTree> trees;
  trees.reserve(primes_.size());
  cand_offsets_.push_back(0);
  for (NodeId p : primes_) {
    trees.emplace_back(sh, lca, links, base_, marks_, p, kFlatBlock);
    const auto& ct = trees.back();
    std::vector<std::uint32_t> order(ct.links().size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return ct.links()[a].score > ct.links()[b].score; });
    // local ids are kept; only doc, raw and score are ever reported
    for (auto i : order) {
      cands_.push_back(ct.links()[i]);
      cand_sources_.push_back(ct.sources()[i]);
    }
    cand_offsets_.push_back(cands_.size());
  }

  std::vector<bool> bits;
  node_bits_.assign(m + 2, 0);
  for (NodeId u = 1; u <= m; ++u) {
    node_bits_[u] = bits.size();
    const NodeId p = marks_.lowest_prime(u);
    if (p == kDummyNode) continue;
    const std::size_t s = prime_slot(u);
    const auto& ct = trees[s];
    const NodeId lu = ct.local(u);
    if (lu == kDummyNode) continue;  // routed to a lower prime
    const NodeId lend = ct.shape().subtree_end[lu];
    for (std::uint64_t i = cand_offsets_[s]; i < cand_offsets_[s + 1]; ++i) {
      const Link& l = cands_[i];
      bits.push_back(l.origin >= lu && l.origin <= lend && l.target < lu);
    }
  }
  node_bits_[m + 1] = bits.size();
  bits_ = BitVec(bits);
}

std::size_t RamIndex::prime_slot(NodeId u) const {
  const NodeId p = marks_.lowest_prime(u);
  auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (p == kDummyNode || it == primes_.end() || *it != p) throw Error(ErrorCode::kInvalidArgument, "node has no prime ancestor");
  return static_cast<std::size_t>(it - primes_.begin());
}

std::span<const Link> RamIndex::candidates(NodeId u) const {
  const auto s = prime_slot(u);
  return std::span<const Link>(cands_).subspan(cand_offsets_[s], cand_offsets_[s + 1] - cand_offsets_[s]);
}

std::span<const LinkId> RamIndex::candidate_sources(NodeId u) const {
  const auto s = prime_slot(u);
  return std::span<const LinkId>(cand_sources_).subspan(cand_offsets_[s], cand_offsets_[s + 1] - cand_offsets_[s]);
}

std::vector<bool> RamIndex::bits(NodeId u) const {
  std::vector<bool> out;
  for (auto i = node_bits_.at(u); i < node_bits_.at(u + 1); ++i) out.push_back(bits_.get(i + 1));
  return out;
}

RamIndex::Result RamIndex::query(NodeId u, std::uint64_t k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (u == kDummyNode || u > base_.node_count()) throw Error(ErrorCode::kOutOfRange, "invalid node id");
  if (k < g() && has_bits(u)) return query_small(u, k);
  return query_large(u, k);
}

RamIndex::Result RamIndex::query_small(NodeId u, std::uint64_t k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!has_bits(u)) throw Error(ErrorCode::kInvalidArgument, "node has no bit row");
  Result res;
  res.small_path = true;
  auto cands = candidates(u);
  const auto lo = node_bits_[u];
  const auto before = bits_.rank1(lo);
  const auto ones = bits_.rank1(node_bits_[u + 1]) - before;
  const auto take = std::min<std::uint64_t>(k, ones);
  for (std::uint64_t i = 1; i <= take; ++i) {
    const auto pos = bits_.select1(before + i);
    ++res.select_calls;
    res.hits.push_back(cands[pos - lo - 1]);
  }
  return res;
}

RamIndex::Result RamIndex::query_large(NodeId u, std::uint64_t k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  Result res;
  const auto t = threshold_for(marks_, sketch_, u, base_.subtree_end(u), k, 2 * g());
  auto streams = base_.streams(u, t.tau);
  MergeStats st;
  for (const auto& item : merge_streams(streams, k, &st)) res.hits.push_back(base_.link(item.payload));
  res.pops = st.pops;
  res.streams = st.streams;
  return res;
}

std::uint64_t RamIndex::word_count() const {
  return base_.word_count() + marks_.word_count() + sketch_.word_count() + primes_.size() + cand_offsets_.size() +
         4 * cands_.size() + node_bits_.size() + bits_.word_count();
}

void RamIndex::save(Writer& w) const {
  base_.save(w);
  marks_.save(w);
  sketch_.save(w);
  w.put_vec(primes_);
  w.put_vec(cand_offsets_);
  save_links(w, cands_);
  w.put_vec(cand_sources_);
  w.put_vec(node_bits_);
  bits_.save(w);
}

RamIndex RamIndex::load(Reader& r) {
  RamIndex x;
  x.base_ = ThresholdIndex::load(r);
  x.marks_ = MarkedSet::load(r);
  x.sketch_ = Sketch::load(r);
  x.primes_ = r.get_vec<NodeId>();
  x.cand_offsets_ = r.get_vec<std::uint64_t>();
  x.cands_ = load_links(r);
  x.cand_sources_ = r.get_vec<LinkId>();
  x.node_bits_ = r.get_vec<std::uint64_t>();
  x.bits_ = BitVec::load(r);
  if (x.cand_offsets_.size() != x.primes_.size() + 1 || x.cand_offsets_.back() != x.cands_.size() ||
      x.cand_sources_.size() != x.cands_.size() ||
      !std::is_sorted(x.cand_offsets_.begin(), x.cand_offsets_.end()) ||
      !std::is_sorted(x.node_bits_.begin(), x.node_bits_.end()) ||
      x.node_bits_.size() != x.base_.node_count() + 2ul || x.node_bits_.back() != x.bits_.size()) {
    throw Error(ErrorCode::kCorrupt, "ram index arrays");
  }
  return x;
}

}  // namespace tkdr

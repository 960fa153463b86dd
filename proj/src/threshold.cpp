#include "tkdr/threshold.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

namespace tkdr {

namespace {
constexpr std::uint64_t kLinkWords = 3;  // origin, target, score
}

unsigned node_rank(std::uint64_t size, std::uint64_t block_words) {
  const std::uint64_t b = block_words ? block_words : 1;
  const std::uint64_t blocks = (size + b - 1) / b;
  // rounding the log up keeps equal-rank regions on paths
  return blocks <= 1 ? 0 : ceil_log2(blocks);
}

ThresholdIndex::ThresholdIndex(const TreeShape& tree, std::span<const Link> links, std::uint64_t block_words,
                               Flavor flavor)
    : block_(block_words), flavor_(flavor), links_(links.begin(), links.end()), parent_(tree.parent),
      subtree_end_(tree.subtree_end), size_(tree.size) {
  if (block_words < 1) throw Error(ErrorCode::kInvalidArgument, "block size must be >= 1");
  build_components();
  build_groups();
}

void ThresholdIndex::build_components() {
  const NodeId m = static_cast<NodeId>(parent_.size() - 1);
  rank_.assign(m + 1, 0);
  comp_.assign(m + 1, 0);
  components_.clear();
  max_rank_ = m ? node_rank(size_[kRootNode], block_) : 0;
  for (NodeId u = 1; u <= m; ++u) {
    rank_[u] = static_cast<std::uint8_t>(node_rank(size_[u], block_));
    const NodeId p = parent_[u];
    if (p != kDummyNode && rank_[u] > rank_[p]) throw Error(ErrorCode::kCorrupt, "rank increases downward");
    if (p != kDummyNode && rank_[u] == rank_[p]) {
      comp_[u] = comp_[p];
      auto& c = components_[comp_[u]];
      if (c.rank >= 1) {
        if (c.path.back() != p) throw Error(ErrorCode::kCorrupt, "equal-rank component is not a path");
        c.path.push_back(u);
      }
    } else {
      comp_[u] = static_cast<std::uint32_t>(components_.size());
      Component c;
      c.top = u;
      c.rank = rank_[u];
      if (c.rank >= 1) c.path.push_back(u);
      components_.push_back(std::move(c));
    }
  }
  if (m) comp_[kDummyNode] = comp_[kRootNode];

  by_origin_.resize(links_.size());
  std::iota(by_origin_.begin(), by_origin_.end(), 0);
  std::stable_sort(by_origin_.begin(), by_origin_.end(),
                   [&](LinkId a, LinkId b) { return links_[a].origin < links_[b].origin; });
  std::vector<NodeId> origins(by_origin_.size());
  for (std::size_t i = 0; i < by_origin_.size(); ++i) origins[i] = links_[by_origin_[i]].origin;
  for (auto& c : components_) {
    if (c.rank != 0) continue;
    // a rank-0 component is the whole subtree of its top
    c.list_begin = static_cast<std::uint32_t>(std::lower_bound(origins.begin(), origins.end(), c.top) - origins.begin());
    c.list_end = static_cast<std::uint32_t>(
        std::upper_bound(origins.begin(), origins.end(), subtree_end_[c.top]) - origins.begin());
  }
}

bool ThresholdIndex::targets_component(const Link& l, std::uint32_t c) const { return comp_[l.target] == c; }

unsigned ThresholdIndex::link_rank(LinkId i) const {
  const Link& l = links_.at(i);
  return l.target == kDummyNode ? max_rank_ : rank_[l.target];
}

std::span<const LinkId> ThresholdIndex::component_list(std::uint32_t c) const {
  const auto& comp = components_.at(c);
  return std::span<const LinkId>(by_origin_).subspan(comp.list_begin, comp.list_end - comp.list_begin);
}

NodeId ThresholdIndex::pseudo_origin(LinkId i) const {
  const Link& l = links_.at(i);
  const auto& c = components_[comp_[l.target]];
  if (c.rank == 0) throw Error(ErrorCode::kInvalidArgument, "target not in a path component");
  auto is_anc = [&](NodeId a, NodeId b) { return a <= b && b <= subtree_end_[a]; };
  // ancestors of the origin form a prefix of the path
  std::size_t lo = 0, hi = c.path.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (is_anc(c.path[mid], l.origin)) lo = mid; else hi = mid;
  }
  if (!is_anc(c.path[lo], l.origin)) throw Error(ErrorCode::kInvalidArgument, "origin not below component");
  return c.path[lo];
}

void ThresholdIndex::build_groups() {
  std::vector<std::vector<WeightedInterval>> per_comp(components_.size());
  groups_.assign(max_rank_, Group{});
  for (LinkId i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    const unsigned r = link_rank(i);
    if (r == 0) continue;
    const std::uint32_t c = comp_[l.target];
    per_comp[c].push_back(WeightedInterval{l.target + 1, pseudo_origin(i), l.score, i});
  }
  for (std::size_t c = 0; c < components_.size(); ++c) {
    if (components_[c].rank >= 1) components_[c].stabbing = PersistentStabbing(per_comp[c]);
  }
  for (LinkId id : by_origin_) {
    const unsigned r = link_rank(id);
    if (r >= 1) groups_[r - 1].by_origin.push_back(id);
  }
  for (auto& g : groups_) {
    std::vector<std::uint64_t> origins, scores;
    for (LinkId id : g.by_origin) {
      origins.push_back(links_[id].origin);
      scores.push_back(links_[id].score);
    }
    g.origins = RankDict(origins);
    g.scores = RankDict(scores);
    if (flavor_ == Flavor::kExternal) {
      std::vector<Point2> pts;
      pts.reserve(g.by_origin.size());
      for (std::uint32_t x = 0; x < g.by_origin.size(); ++x) {
        const auto y = static_cast<std::uint32_t>(g.scores.rank_of(links_[g.by_origin[x]].score) + 1);
        pts.push_back(Point2{x + 1, y, g.by_origin[x]});
      }
      g.points = ThreeSided(std::move(pts), block_);
    } else {
      std::vector<Score> vals;
      for (LinkId id : g.by_origin) vals.push_back(links_[id].score);
      g.sorted = OnlineSortedRange(std::move(vals));
    }
  }
}

void ThresholdIndex::query(NodeId u, Score tau, std::vector<LinkId>& out, IoTape* tape, Trace* trace) const {
  if (u == kDummyNode || u >= rank_.size()) throw Error(ErrorCode::kOutOfRange, "invalid node id");
  if (tau < 1) throw Error(ErrorCode::kInvalidArgument, "invalid threshold");
  const unsigned ru = rank_[u];
  const std::uint32_t c = comp_[u];
  const NodeId end = subtree_end_[u];
  if (trace) trace->component = c;

  const std::size_t equi_begin = out.size();
  if (ru == 0) {
    auto list = component_list(c);
    if (tape) tape->charge_scan(Phase::kEqui, kLinkWords * list.size());
    for (LinkId id : list) {
      const Link& l = links_[id];
      if (l.origin >= u && l.origin <= end && l.target < u && l.score >= tau && targets_component(l, c)) {
        out.push_back(id);
      }
    }
  } else {
    BlockCounter io(tape, Phase::kEqui);
    auto cur = components_[c].stabbing.stab(u, tau, tape ? &io : nullptr);
    while (auto item = cur.next()) out.push_back(item->payload);
  }
  if (trace) trace->equi.assign(out.begin() + static_cast<std::ptrdiff_t>(equi_begin), out.end());

  const std::size_t high_begin = out.size();
  for (unsigned r = ru + 1; r <= max_rank_; ++r) {
    const Group& g = groups_[r - 1];
    if (trace) trace->groups.push_back(r);
    if (tape) {
      tape->charge(Phase::kConversion, g.origins.lookup_blocks(2, tape->block_words()) +
                                           g.scores.lookup_blocks(1, tape->block_words()));
    }
    const auto a = g.origins.rank_of(u) + 1;
    const auto b = g.origins.rank_of(static_cast<std::int64_t>(end) + 1);
    if (a > b) continue;
    const auto y = g.scores.rank_of(tau) + 1;
    if (y > g.by_origin.size()) continue;
    if (flavor_ == Flavor::kRam) {
      auto cur = g.sorted.query(a, b);
      while (auto item = cur.next()) {
        if (item->score < tau) break;
        out.push_back(g.by_origin[item->payload - 1]);
      }
      continue;
    }
    std::vector<Point2> hits;
    g.points.query(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(y), hits,
                   tape, Phase::kHigh);
    for (const auto& p : hits) out.push_back(p.payload);
  }
  if (trace) trace->high.assign(out.begin() + static_cast<std::ptrdiff_t>(high_begin), out.end());
}

std::vector<LinkStream> ThresholdIndex::streams(NodeId u, Score tau) const {
  if (u == kDummyNode || u >= rank_.size()) throw Error(ErrorCode::kOutOfRange, "invalid node id");
  std::vector<LinkStream> out;
  const unsigned ru = rank_[u];
  const std::uint32_t c = comp_[u];
  const NodeId end = subtree_end_[u];
  if (ru == 0) {
    auto items = std::make_shared<std::vector<StreamItem>>();
    for (LinkId id : component_list(c)) {
      const Link& l = links_[id];
      if (l.origin >= u && l.origin <= end && l.target < u && l.score >= tau && targets_component(l, c)) {
        items->push_back(StreamItem{l.score, id});
      }
    }
    std::sort(items->begin(), items->end(), [](const StreamItem& a, const StreamItem& b) { return a.score > b.score; });
    if (!items->empty()) {
      out.push_back([items, i = std::size_t{0}]() mutable -> std::optional<StreamItem> {
        if (i == items->size()) return std::nullopt;
        return (*items)[i++];
      });
    }
  } else {
    auto cur = std::make_shared<PersistentStabbing::Cursor>(components_[c].stabbing.stab(u, tau));
    out.push_back([cur]() { return cur->next(); });
  }
  if (flavor_ != Flavor::kRam && ru < max_rank_) throw Error(ErrorCode::kInvalidArgument, "streams need the RAM flavor");
  for (unsigned r = ru + 1; r <= max_rank_; ++r) {
    const Group& g = groups_[r - 1];
    const auto a = g.origins.rank_of(u) + 1;
    const auto b = g.origins.rank_of(static_cast<std::int64_t>(end) + 1);
    if (a > b) continue;
    auto cur = std::make_shared<OnlineSortedRange::Cursor>(g.sorted.query(a, b));
    out.push_back([cur, &g, tau]() -> std::optional<StreamItem> {
      auto item = cur->next();
      if (!item || item->score < tau) return std::nullopt;
      return StreamItem{item->score, g.by_origin[item->payload - 1]};
    });
  }
  return out;
}

std::uint64_t ThresholdIndex::word_count() const {
  std::uint64_t w = kLinkWords * links_.size() + by_origin_.size() + 2 * rank_.size();
  for (const auto& c : components_) w += 2 + c.path.size() + c.stabbing.word_count();
  for (const auto& g : groups_) {
    w += g.by_origin.size() + g.origins.word_count() + g.scores.word_count();
    w += flavor_ == Flavor::kExternal ? g.points.word_count() : g.sorted.word_count();
  }
  return w;
}

void ThresholdIndex::save(Writer& w) const {
  w.put<std::uint64_t>(block_);
  w.put(static_cast<std::uint8_t>(flavor_));
  w.put_vec(parent_);
  w.put_vec(size_);
  save_links(w, links_);
  for (const auto& c : components_) {
    if (c.rank >= 1) c.stabbing.save(w);
  }
  for (const auto& g : groups_) {
    g.origins.save(w);
    g.scores.save(w);
    if (flavor_ == Flavor::kExternal) g.points.save(w); else g.sorted.save(w);
  }
}

ThresholdIndex ThresholdIndex::load(Reader& r) {
  ThresholdIndex t;
  t.block_ = r.get<std::uint64_t>();
  auto flavor = r.get<std::uint8_t>();
  if (t.block_ < 1 || flavor > 1) throw Error(ErrorCode::kCorrupt, "threshold header");
  t.flavor_ = static_cast<Flavor>(flavor);
  TreeShape shape;
  shape.parent = r.get_vec<NodeId>();
  shape.size = r.get_vec<std::uint64_t>();
  if (shape.parent.empty() || shape.size.size() != shape.parent.size()) throw Error(ErrorCode::kCorrupt, "threshold tree");
  for (NodeId u = 1; u < shape.parent.size(); ++u) {
    if (shape.parent[u] >= u) throw Error(ErrorCode::kCorrupt, "threshold tree");
  }
  shape.finish_from_parents();
  t.parent_ = shape.parent;
  t.subtree_end_ = shape.subtree_end;
  t.size_ = shape.size;
  t.links_ = load_links(r);
  for (const auto& l : t.links_) {
    if (l.origin == kDummyNode || l.origin >= t.parent_.size() || l.target >= l.origin) {
      throw Error(ErrorCode::kCorrupt, "threshold links");
    }
  }
  t.build_components();
  for (auto& c : t.components_) {
    if (c.rank >= 1) c.stabbing = PersistentStabbing::load(r);
  }
  t.groups_.assign(t.max_rank_, Group{});
  for (LinkId id : t.by_origin_) {
    const unsigned rr = t.link_rank(id);
    if (rr >= 1) t.groups_[rr - 1].by_origin.push_back(id);
  }
  for (auto& g : t.groups_) {
    g.origins = RankDict::load(r);
    g.scores = RankDict::load(r);
    if (t.flavor_ == Flavor::kExternal) g.points = ThreeSided::load(r); else g.sorted = OnlineSortedRange::load(r);
    if (g.origins.size() != g.by_origin.size()) throw Error(ErrorCode::kCorrupt, "threshold group");
  }
  return t;
}

}  // namespace tkdr

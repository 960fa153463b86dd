#include "tkdr/links.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace tkdr {

std::string to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kFrequency: return "freq";
    case ScoreKind::kMinDist: return "mindist";
    case ScoreKind::kStatic: return "static";
  }
  return "?";
}

ScoreKind parse_score_kind(const std::string& s) {
  if (s == "freq" || s == "frequency") return ScoreKind::kFrequency;
  if (s == "mindist") return ScoreKind::kMinDist;
  if (s == "static") return ScoreKind::kStatic;
  throw Error(ErrorCode::kInvalidArgument, "unknown score kind: " + s);
}

void Scorer::save(Writer& w) const {
  w.put(static_cast<std::uint8_t>(kind));
  w.put_vec(static_weights);
}

Scorer Scorer::load(Reader& r) {
  Scorer s;
  auto k = r.get<std::uint8_t>();
  if (k > 2) throw Error(ErrorCode::kCorrupt, "bad score kind");
  s.kind = static_cast<ScoreKind>(k);
  s.static_weights = r.get_vec<std::int64_t>();
  return s;
}

std::int64_t score(std::span<const std::uint64_t> occurrences, const Scorer& scorer, DocId doc, std::uint64_t n) {
  if (occurrences.empty()) throw Error(ErrorCode::kInvalidArgument, "no occurrences");
  switch (scorer.kind) {
    case ScoreKind::kFrequency:
      return static_cast<std::int64_t>(occurrences.size());
    case ScoreKind::kMinDist: {
      if (occurrences.size() < 2) return -static_cast<std::int64_t>(n + 1);
      std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
      for (std::size_t i = 1; i < occurrences.size(); ++i) best = std::min(best, occurrences[i] - occurrences[i - 1]);
      return -static_cast<std::int64_t>(best);
    }
    case ScoreKind::kStatic:
      if (doc == 0 || doc > scorer.static_weights.size()) {
        throw Error(ErrorCode::kInvalidArgument, "missing static weight for document " + std::to_string(doc));
      }
      return scorer.static_weights[doc - 1];
  }
  return 0;
}

Marking mark_documents(const GSTree& tree, std::size_t doc_count) {
  Marking marks(tree.node_count() + 1);
  std::vector<NodeId> last_leaf(doc_count + 1, kDummyNode);
  for (NodeId leaf : tree.leaves()) {
    DocId d = tree.leaf_doc(leaf);
    marks[leaf].push_back(d);
    // LCAs of preorder-consecutive leaves of d are all the pairwise LCAs.
    if (last_leaf[d] != kDummyNode) marks[tree.lca(last_leaf[d], leaf)].push_back(d);
    last_leaf[d] = leaf;
  }
  for (auto& m : marks) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
  }
  return marks;
}

namespace {

// Minimum consecutive gap over a growing offset set, merged small-to-large.
struct GapSet {
  std::set<std::uint64_t> offsets;
  std::uint64_t min_gap = std::numeric_limits<std::uint64_t>::max();

  void insert(std::uint64_t x) {
    auto [it, fresh] = offsets.insert(x);
    if (!fresh) return;
    if (it != offsets.begin()) min_gap = std::min(min_gap, x - *std::prev(it));
    if (auto nx = std::next(it); nx != offsets.end()) min_gap = std::min(min_gap, *nx - x);
  }
  void absorb(GapSet& other) {
    if (other.offsets.size() > offsets.size()) std::swap(*this, other);
    min_gap = std::min(min_gap, other.min_gap);
    for (auto x : other.offsets) insert(x);
    other.offsets.clear();
  }
};

}  // namespace

std::vector<Link> generate_links(const GSTree& tree, const DocumentCollection& collection, const Marking& marking,
                                 const Scorer& scorer) {
  const std::size_t docs = collection.doc_count();
  const TreeShape& shape = tree.shape();
  std::vector<std::vector<NodeId>> by_doc(docs + 1);
  for (NodeId u = 1; u <= tree.node_count(); ++u) {
    for (DocId d : marking[u]) by_doc[d].push_back(u);
  }
  std::vector<std::vector<NodeId>> leaves_of(docs + 1);
  for (NodeId leaf : tree.leaves()) leaves_of[tree.leaf_doc(leaf)].push_back(leaf);
  for (auto& l : leaves_of) std::sort(l.begin(), l.end());

  std::vector<Link> links;
  std::vector<NodeId> stack;
  for (DocId d = 1; d <= docs; ++d) {
    const auto& nodes = by_doc[d];  // preorder sorted
    const std::size_t base = links.size();
    stack.clear();
    for (NodeId u : nodes) {
      while (!stack.empty() && !shape.is_ancestor(stack.back(), u)) stack.pop_back();
      links.push_back(Link{u, stack.empty() ? kDummyNode : stack.back(), d, 0, 0});
      stack.push_back(u);
    }
    const std::size_t count = links.size() - base;
    const auto& dl = leaves_of[d];
    if (scorer.kind == ScoreKind::kMinDist) {
      std::vector<GapSet> sets(count);
      std::vector<std::size_t> parent_idx(count, count);
      for (std::size_t i = 0; i < count; ++i) {
        NodeId t = links[base + i].target;
        if (t != kDummyNode) {
          auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
          parent_idx[i] = static_cast<std::size_t>(it - nodes.begin());
        }
      }
      const std::uint64_t start = collection.start(d);
      for (std::size_t i = count; i-- > 0;) {
        NodeId u = links[base + i].origin;
        if (shape.is_leaf(u)) sets[i].insert(tree.leaf_suffix(u) - start);
        auto& s = sets[i];
        links[base + i].raw = s.offsets.size() < 2 ? -static_cast<std::int64_t>(collection.size() + 1)
                                                   : -static_cast<std::int64_t>(s.min_gap);
        if (parent_idx[i] < count) sets[parent_idx[i]].absorb(s);
      }
    } else {
      for (std::size_t i = 0; i < count; ++i) {
        NodeId u = links[base + i].origin;
        auto lo = std::lower_bound(dl.begin(), dl.end(), u);
        auto hi = std::upper_bound(dl.begin(), dl.end(), shape.subtree_end[u]);
        if (scorer.kind == ScoreKind::kFrequency) {
          links[base + i].raw = static_cast<std::int64_t>(hi - lo);
        } else {
          // static weights ignore the positions
          const std::uint64_t any = 0;
          links[base + i].raw = score(std::span<const std::uint64_t>(&any, 1), scorer, d, collection.size());
        }
      }
    }
  }
  std::sort(links.begin(), links.end(),
            [](const Link& a, const Link& b) { return a.origin != b.origin ? a.origin < b.origin : a.doc < b.doc; });
  return links;
}

void reduce_scores_rank_space(std::vector<Link>& links) {
  std::vector<LinkId> order(links.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](LinkId a, LinkId b) {
    const Link& x = links[a];
    const Link& y = links[b];
    if (x.raw != y.raw) return x.raw < y.raw;
    if (x.doc != y.doc) return x.doc > y.doc;
    return x.origin > y.origin;
  });
  for (std::size_t i = 0; i < order.size(); ++i) links[order[i]].score = static_cast<Score>(i + 1);
}

std::vector<Link> build_links(const GSTree& tree, const DocumentCollection& collection, const Scorer& scorer) {
  auto marking = mark_documents(tree, collection.doc_count());
  auto links = generate_links(tree, collection, marking, scorer);
  reduce_scores_rank_space(links);
  return links;
}

void save_links(Writer& w, const std::vector<Link>& links) {
  std::vector<NodeId> o, t;
  std::vector<DocId> d;
  std::vector<Score> s;
  std::vector<std::int64_t> raw;
  for (const auto& l : links) {
    o.push_back(l.origin);
    t.push_back(l.target);
    d.push_back(l.doc);
    s.push_back(l.score);
    raw.push_back(l.raw);
  }
  w.put_vec(o);
  w.put_vec(t);
  w.put_vec(d);
  w.put_vec(s);
  w.put_vec(raw);
}

std::vector<Link> load_links(Reader& r) {
  auto o = r.get_vec<NodeId>();
  auto t = r.get_vec<NodeId>();
  auto d = r.get_vec<DocId>();
  auto s = r.get_vec<Score>();
  auto raw = r.get_vec<std::int64_t>();
  const auto m = o.size();
  if (t.size() != m || d.size() != m || s.size() != m || raw.size() != m) {
    throw Error(ErrorCode::kCorrupt, "link arrays disagree");
  }
  std::vector<Link> links(m);
  for (std::size_t i = 0; i < m; ++i) links[i] = Link{o[i], t[i], d[i], s[i], raw[i]};
  return links;
}

}  // namespace tkdr

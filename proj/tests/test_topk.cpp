#include <algorithm>
#include <set>

#include "doctest.h"
#include "tkdr/topk.hpp"
#include "util.hpp"

using namespace tkdr;

namespace {

struct Built {
  DocumentCollection c;
  GSTree t;
  std::vector<Link> links;
};

Built build(DocumentCollection c, ScoreKind kind = ScoreKind::kFrequency) {
  GSTree t(c);
  Scorer s;
  s.kind = kind;
  if (kind == ScoreKind::kStatic) {
    for (std::size_t d = 0; d < c.doc_count(); ++d) s.static_weights.push_back(static_cast<std::int64_t>(d * 13 % 7));
  }
  auto links = build_links(t, c, s);
  return Built{std::move(c), std::move(t), std::move(links)};
}

std::vector<Score> stabbed_scores(const std::vector<Link>& links, const TreeShape& sh, NodeId u) {
  std::vector<Score> out;
  for (const auto& l : links) {
    if (stabs(l, u, sh)) out.push_back(l.score);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::vector<Score> top_scores(const std::vector<Link>& links, const TreeShape& sh, NodeId u, std::uint64_t k) {
  auto s = stabbed_scores(links, sh, u);
  if (s.size() > k) s.resize(k);
  return s;
}

std::vector<Score> scores_of(const std::vector<Link>& hits) {
  std::vector<Score> s;
  for (const auto& l : hits) s.push_back(l.score);
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

std::uint64_t leaves_in(const TreeShape& sh, NodeId u) {
  std::uint64_t c = 0;
  for (NodeId v = u; v <= sh.subtree_end[u]; ++v) c += sh.is_leaf(v);
  return c;
}

}  // namespace

TEST_CASE("marked set extremes") {
  auto b = build(test::random_docs(3, 6, 30, 3));
  const auto& sh = b.t.shape();
  Lca lca(sh);
  const auto n = b.t.leaf_count();
  MarkedSet all(sh, lca, n);
  CHECK(all.marked_nodes() == std::vector<NodeId>{kRootNode});
  MarkedSet one(sh, lca, 1);
  for (NodeId u = 1; u <= b.t.node_count(); ++u) {
    if (sh.children(u).size() >= 2 || sh.is_leaf(u)) CHECK(one.is_marked(u));
  }
  CHECK(one.marked_nodes().size() <= 4 * n);
  CHECK_THROWS_AS(MarkedSet(sh, lca, 0), Error);
  CHECK_THROWS_AS(MarkedSet(sh, lca, n + 1), Error);
}

TEST_CASE("marked set closure and fringe bound") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto b = build(test::random_docs(seed * 5, 10, 60, 2 + seed % 3));
    const auto& sh = b.t.shape();
    Lca lca(sh);
    const auto n = b.t.leaf_count();
    for (std::uint64_t g : {1ul, 2ul, 3ul, 7ul, 16ul, n / 2}) {
      MarkedSet ms(sh, lca, g);
      const auto& mk = ms.marked_nodes();
      CHECK(mk.size() <= 4 * n / g + 1);
      CHECK(ms.is_marked(kRootNode));
      for (NodeId a : mk) {
        for (NodeId c : mk) CHECK(ms.is_marked(lca(a, c)));
      }
      for (NodeId u = 1; u <= b.t.node_count(); ++u) {
        auto s = ms.highest_marked(u, sh.subtree_end[u]);
        // naive: marked descendant with no marked proper ancestor inside subtree(u)
        std::vector<NodeId> tops;
        for (NodeId v = u; v <= sh.subtree_end[u]; ++v) {
          if (!ms.is_marked(v)) continue;
          bool top = true;
          for (NodeId w = sh.parent[v]; w >= u && w != kDummyNode; w = sh.parent[w]) top = top && !ms.is_marked(w);
          if (top) tops.push_back(v);
        }
        CHECK(tops.size() <= 1);
        CHECK(s.has_value() == !tops.empty());
        if (s) {
          CHECK(*s == tops[0]);
          CHECK(leaves_in(sh, u) - leaves_in(sh, *s) <= 2 * g);
        } else {
          CHECK(leaves_in(sh, u) < 2 * g);
        }
        NodeId p = kDummyNode;
        for (NodeId w = u; w != kDummyNode; w = sh.parent[w]) {
          if (sh.parent[w] != kDummyNode && ms.is_marked(sh.parent[w])) {
            p = w;
            break;
          }
        }
        CHECK(ms.lowest_prime(u) == p);
      }
    }
  }
}

TEST_CASE("sketch order statistics") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto b = build(test::random_docs(seed * 11, 15, 50, 3), static_cast<ScoreKind>(seed % 3));
    const auto& sh = b.t.shape();
    ThresholdIndex idx(sh, b.links, 2);
    MarkedSet ms(sh, Lca(sh), 3);
    Sketch sk(idx, ms);
    for (NodeId u : ms.marked_nodes()) {
      auto want = stabbed_scores(b.links, sh, u);
      auto e = sk.entries(u);
      CHECK(sk.stabbed_count(u) == want.size());
      std::size_t i = 0;
      for (std::size_t q = 1; q <= want.size(); q *= 2, ++i) {
        REQUIRE(i < e.size());
        CHECK(e[i] == want[q - 1]);
      }
      CHECK(i == e.size());
    }
  }
}

TEST_CASE("threshold_for picks the power of two") {
  auto b = build(DocumentCollection({"banana", "ana"}));
  const auto& sh = b.t.shape();
  ThresholdIndex idx(sh, b.links, 1);
  MarkedSet ms(sh, Lca(sh), 4);
  Sketch sk(idx, ms);
  auto t = threshold_for(ms, sk, kRootNode, sh.subtree_end[kRootNode], 3, 8);
  CHECK(t.q == 16);
  CHECK(t.tau == 1);  // more than the two stabbed links
  CHECK_FALSE(t.fallback);
}

TEST_CASE("conversion output size bounds") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto b = build(test::random_docs(seed * 17, 25, 80, 2 + seed % 4), static_cast<ScoreKind>(seed % 3));
    const auto& sh = b.t.shape();
    for (std::uint64_t B : {1ul, 2ul, 4ul}) {
      const auto n = b.t.leaf_count();
      ThresholdIndex idx(sh, b.links, B);
      const auto g = grouping_factor(n, B, 1);
      MarkedSet ms(sh, Lca(sh), g);
      Sketch sk(idx, ms);
      for (NodeId u = 1; u <= b.t.node_count(); ++u) {
        const auto ndoc = stabbed_scores(b.links, sh, u).size();
        for (std::uint64_t k : {1ul, 2ul, 5ul, 25ul, 60ul}) {
          auto t = threshold_for(ms, sk, u, sh.subtree_end[u], k, 2 * g);
          const auto z = idx.query(u, t.tau).size();
          CHECK(z >= std::min<std::uint64_t>(k, ndoc));
          CHECK(z <= 2 * (k + 2 * g) + 2 * g);
        }
      }
    }
  }
}

TEST_CASE("candidate trees keep the top g") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto b = build(test::random_docs(seed * 23, 12 + seed, 70, 2 + seed % 3), static_cast<ScoreKind>(seed % 3));
    const auto& sh = b.t.shape();
    Lca lca(sh);
    const auto n = b.t.leaf_count();
    for (std::uint64_t B : {1ul, 2ul, 8ul}) {
      ThresholdIndex base(sh, b.links, B);
      for (std::uint64_t g : {2ul, 5ul, grouping_factor(n, B, 1)}) {
        MarkedSet ms(sh, lca, g);
        for (NodeId p : ms.prime_nodes()) {
          auto cls = classify_links(sh, b.links, ms, p);
          CHECK(cls.fringe.size() <= 4 * g);
          CHECK(cls.near.size() <= 4 * g);
          auto [a, e] = std::pair<NodeId, NodeId>(p, sh.subtree_end[p]);
          std::size_t inside = 0;
          for (const auto& l : b.links) inside += l.origin >= a && l.origin <= e;
          CHECK(cls.fringe.size() + cls.near.size() + cls.far.size() + cls.small.size() == inside);

          CandidateTree ct(sh, lca, b.links, base, ms, p, B);
          CHECK(ct.fringe_count() == cls.fringe.size());
          CHECK(ct.near_count() == cls.near.size());
          CHECK(ct.far_total() == cls.far.size());
          CHECK(ct.links().size() <= 9 * g);
          // compaction leaves no unary node that is not needed
          std::set<NodeId> needed{1};
          if (ct.ustar()) needed.insert(ct.local(ct.ustar()));
          for (const auto& l : ct.links()) {
            needed.insert(l.origin);
            needed.insert(l.target);
          }
          for (NodeId v = 1; v <= ct.shape().node_count(); ++v) {
            const NodeId gv = ct.nodes()[v - 1];
            const bool fringe_region = !ct.ustar() || !sh.is_ancestor(ct.ustar(), gv);
            if (!needed.count(v) && !fringe_region) CHECK(ct.shape().children(v).size() >= 2);
            if (v > 1) CHECK(sh.is_ancestor(ct.nodes()[ct.shape().parent[v] - 1], gv));
          }
          std::set<Score> cand;
          for (const auto& l : ct.links()) cand.insert(l.score);
          for (NodeId u = 1; u <= b.t.node_count(); ++u) {
            if (ms.lowest_prime(u) != p) continue;
            if (ct.ustar() && u != ct.ustar() && sh.is_ancestor(ct.ustar(), u)) continue;
            REQUIRE(ct.local(u) != kDummyNode);
            for (Score s : top_scores(b.links, sh, u, g)) CHECK(cand.count(s) == 1);
            for (std::uint64_t k : {1ul, 2ul, g}) {
              REQUIRE(scores_of(ct.topk(u, k)) == top_scores(b.links, sh, u, k));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("topk query matches brute force") {
  std::set<int> all_routes;
  std::size_t nested = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto b = build(test::random_docs(seed * 29, 6 + seed * 3, 40 + seed * 20, 2 + seed % 4),
                   static_cast<ScoreKind>(seed % 3));
    const auto& sh = b.t.shape();
    const auto D = b.c.doc_count();
    for (std::uint64_t B : {1ul, 2ul, 4ul, 16ul}) {
      const unsigned h = std::min(2u, max_levels(b.t.leaf_count()));
      TopKIndex idx(b.t, b.links, B, h);
      std::set<int> routes;
      for (NodeId u = 1; u <= b.t.node_count(); ++u) {
        for (std::uint64_t k = 1; k <= 2 * D; k += 1 + k / 3) {
          auto r = idx.query(u, k);
          routes.insert(r.route);
          INFO("seed " << seed << " B " << B << " u " << u << " k " << k << " route " << r.route);
          REQUIRE(scores_of(r.hits) == top_scores(b.links, sh, u, k));
        }
      }
      CHECK(routes.count(0) == 1);
      all_routes.insert(routes.begin(), routes.end());
      for (unsigned lv = 1; lv <= idx.level_count(); ++lv) {
        for (const auto& ct : idx.level(lv).trees) nested += !ct.flat();
      }
    }
  }
  CHECK(all_routes.count(1) == 1);
  CHECK(all_routes.count(2) == 1);
  CHECK(nested > 0);
}

TEST_CASE("topk examples") {
  auto b = build(DocumentCollection({"banana", "ana"}));
  TopKIndex idx(b.t, b.links, 1, 1);
  NodeId u = *b.t.locus("ana");
  auto r = idx.query(u, 1);
  REQUIRE(r.hits.size() == 1);
  CHECK(r.hits[0].doc == 1);
  CHECK(r.hits[0].raw == 2);
  CHECK(idx.query(u, 5).hits.size() == 2);
  CHECK_THROWS_AS(idx.query(u, 0), Error);
  CHECK_THROWS_AS(TopKIndex(b.t, b.links, 1, 0), Error);

  DocumentCollection c({"ab", "ba", "aab"});
  GSTree t(c);
  Scorer s{ScoreKind::kStatic, {3, 9, 5}};
  auto links = build_links(t, c, s);
  TopKIndex st(t, links, 2, 1);
  auto top = st.query(kRootNode, 1);
  REQUIRE(top.hits.size() == 1);
  CHECK(top.hits[0].doc == 2);
}

TEST_CASE("topk serialization") {
  auto b = build(test::random_docs(41, 20, 80, 3));
  TopKIndex idx(b.t, b.links, 2, 2);
  Writer w;
  idx.save(w);
  Reader r(w.data());
  auto back = TopKIndex::load(r);
  CHECK(r.done());
  CHECK(back.word_count() == idx.word_count());
  for (NodeId u = 1; u <= b.t.node_count(); ++u) {
    for (std::uint64_t k : {1ul, 3ul, 9ul}) CHECK(scores_of(back.query(u, k).hits) == scores_of(idx.query(u, k).hits));
  }
}

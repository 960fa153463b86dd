#include <algorithm>
#include <set>

#include "doctest.h"
#include "tkdr/threshold.hpp"
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
    for (std::size_t d = 0; d < c.doc_count(); ++d) s.static_weights.push_back(static_cast<std::int64_t>(d * 7 % 5));
  }
  auto links = build_links(t, c, s);
  return Built{std::move(c), std::move(t), std::move(links)};
}

std::vector<LinkId> naive(const std::vector<Link>& links, const TreeShape& shape, NodeId u, Score tau) {
  std::vector<LinkId> out;
  for (LinkId i = 0; i < links.size(); ++i) {
    if (stabs(links[i], u, shape) && links[i].score >= tau) out.push_back(i);
  }
  return out;
}

std::vector<LinkId> sorted(std::vector<LinkId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("node rank") {
  CHECK(node_rank(4, 4) == 0);
  CHECK(node_rank(5, 4) == 1);
  CHECK(node_rank(8, 4) == 1);
  CHECK(node_rank(9, 4) == 2);
  CHECK(node_rank(17, 4) == 3);
  CHECK(node_rank(0, 4) == 0);
  CHECK(node_rank(11, 2) == 3);
  CHECK(node_rank(16, 1) == 4);
}

TEST_CASE("threshold on a single short document") {
  auto b = build(DocumentCollection({"x"}));
  ThresholdIndex idx(b.t.shape(), b.links, 64);
  CHECK(b.links.size() == 3);
  CHECK(idx.max_rank() == 0);
  REQUIRE(idx.components().size() == 1);
  CHECK(idx.component_list(0).size() == 3);
  CHECK(idx.query(kRootNode, 1).size() == 1);
  CHECK(idx.query(kRootNode, static_cast<Score>(b.links.size() + 1)).empty());
}

TEST_CASE("threshold components") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto b = build(test::random_docs(seed, 12, 40, 3));
    const auto& sh = b.t.shape();
    for (std::uint64_t B : {1u, 2u, 4u, 16u}) {
      ThresholdIndex idx(sh, b.links, B);
      CHECK(idx.max_rank() == node_rank(b.t.leaf_count(), B));
      for (NodeId u = 2; u <= b.t.node_count(); ++u) CHECK(idx.rank(u) <= idx.rank(sh.parent[u]));
      for (std::uint32_t c = 0; c < idx.components().size(); ++c) {
        const auto& comp = idx.components()[c];
        if (comp.rank == 0) {
          CHECK(sh.size[comp.top] <= B);
          CHECK(idx.component_list(c).size() <= 2 * B);
          for (NodeId v = comp.top; v <= sh.subtree_end[comp.top]; ++v) CHECK(idx.component_of(v) == c);
        } else {
          for (std::size_t i = 1; i < comp.path.size(); ++i) CHECK(sh.parent[comp.path[i]] == comp.path[i - 1]);
          for (NodeId v : comp.path) CHECK(idx.component_of(v) == c);
        }
      }
      for (LinkId i = 0; i < b.links.size(); ++i) {
        if (idx.link_rank(i) == 0) continue;
        NodeId s = idx.pseudo_origin(i);
        const auto& comp = idx.components()[idx.component_of(b.links[i].target)];
        CHECK(std::find(comp.path.begin(), comp.path.end(), s) != comp.path.end());
        CHECK(sh.is_ancestor(s, b.links[i].origin));
        // no deeper path node is an ancestor of the origin
        for (NodeId v : comp.path) {
          if (v > s) CHECK_FALSE(sh.is_ancestor(v, b.links[i].origin));
        }
      }
    }
  }
}

TEST_CASE("threshold query matches enumeration") {
  const ScoreKind kinds[] = {ScoreKind::kFrequency, ScoreKind::kMinDist, ScoreKind::kStatic};
  for (std::uint64_t seed = 1; seed <= 9; ++seed) {
    auto b = build(test::random_docs(seed * 31, 8 + seed % 5, 10 + seed * 20, 2 + seed % 3), kinds[seed % 3]);
    const auto& sh = b.t.shape();
    const Score max_tau = static_cast<Score>(b.links.size() + 1);
    for (std::uint64_t B : {1u, 2u, 8u, 64u}) {
      for (auto flavor : {ThresholdIndex::Flavor::kExternal, ThresholdIndex::Flavor::kRam}) {
        ThresholdIndex idx(sh, b.links, B, flavor);
        for (NodeId u = 1; u <= b.t.node_count(); ++u) {
          for (Score tau = 1; tau <= max_tau; tau += 1 + max_tau / 23) {
            auto want = naive(b.links, sh, u, tau);
            auto got = idx.query(u, tau);
            INFO("seed " << seed << " B " << B << " flavor " << int(flavor) << " u " << u << " tau " << tau
                 << " rank " << idx.rank(u) << " got " << got.size() << " want " << want.size());
            REQUIRE(sorted(got) == want);
            if (flavor == ThresholdIndex::Flavor::kRam) {
              std::vector<LinkId> streamed;
              for (auto& st : idx.streams(u, tau)) {
                Score prev = ~Score{0};
                while (auto item = st()) {
                  CHECK(item->score <= prev);
                  prev = item->score;
                  streamed.push_back(item->payload);
                }
              }
              REQUIRE(sorted(streamed) == want);
            }
          }
          CHECK(idx.query(u, max_tau).empty());
        }
        // the root is stabbed by exactly the dummy-target links, one per document
        auto root = idx.query(kRootNode, 1);
        CHECK(root.size() == b.c.doc_count());
        for (LinkId i : root) CHECK(b.links[i].target == kDummyNode);
      }
    }
  }
}

TEST_CASE("threshold trace reads no lower rank") {
  auto b = build(test::random_docs(77, 20, 60, 2));
  const auto& sh = b.t.shape();
  ThresholdIndex idx(sh, b.links, 4);
  for (NodeId u = 1; u <= b.t.node_count(); ++u) {
    ThresholdIndex::Trace tr;
    std::vector<LinkId> out;
    IoTape tape(4);
    idx.query(u, 1, out, &tape, &tr);
    for (unsigned r : tr.groups) CHECK(r > idx.rank(u));
    CHECK(tr.groups.size() == idx.max_rank() - idx.rank(u));
    std::set<LinkId> e(tr.equi.begin(), tr.equi.end());
    for (LinkId i : tr.high) CHECK(e.count(i) == 0);
    for (LinkId i : tr.equi) CHECK(idx.link_rank(i) == idx.rank(u));
    for (LinkId i : tr.high) CHECK(idx.link_rank(i) > idx.rank(u));
    CHECK(tr.equi.size() + tr.high.size() == out.size());
  }
}

TEST_CASE("threshold serialization") {
  auto b = build(test::random_docs(5, 10, 50, 3));
  for (auto flavor : {ThresholdIndex::Flavor::kExternal, ThresholdIndex::Flavor::kRam}) {
    ThresholdIndex idx(b.t.shape(), b.links, 4, flavor);
    Writer w;
    idx.save(w);
    Reader r(w.data());
    auto back = ThresholdIndex::load(r);
    CHECK(r.done());
    CHECK(back.word_count() == idx.word_count());
    for (NodeId u = 1; u <= b.t.node_count(); ++u) {
      CHECK(sorted(back.query(u, 2)) == sorted(idx.query(u, 2)));
    }
    std::string cut = w.data().substr(0, w.data().size() / 2);
    Reader rc(cut);
    CHECK_THROWS_AS(ThresholdIndex::load(rc), Error);
  }
}

#include <set>

#include "doctest.h"
#include "tkdr/harness.hpp"

using namespace tkdr;
using namespace tkdr::harness;

TEST_CASE("oracle on a two document collection") {
  DocumentCollection c({"banana", "ana"});
  Scorer f;
  auto hits = oracle_topk(c, "ana", 2, f);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0] == OracleHit{1, 2});
  CHECK(hits[1] == OracleHit{2, 1});
  CHECK(oracle_topk(c, "xyz", 3, f).empty());
  CHECK(oracle_topk(c, "ana", 0, f).empty());
  CHECK(oracle_topk(c, "ana", 1, f) == std::vector<OracleHit>{{1, 2}});
}

TEST_CASE("oracle answers are prefixes of each other") {
  auto c = random_collection(3, 12, 400, 2);
  Scorer f;
  auto full = oracle_topk(c, "ab", 1000, f);
  for (std::uint64_t k = 1; k <= full.size() + 2; ++k) {
    auto part = oracle_topk(c, "ab", k, f);
    CHECK(part == std::vector<OracleHit>(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(k, full.size()))));
  }
}

TEST_CASE("random collections have the requested shape") {
  auto c = random_collection(9, 7, 300, 26);
  CHECK(c.doc_count() == 7);
  CHECK(c.size() == 300);
  CHECK_THROWS_AS(random_collection(1, 10, 15, 4), Error);
  auto again = random_collection(9, 7, 300, 26);
  CHECK(again.text() == c.text());
}

TEST_CASE("locus patterns reach distinct nodes") {
  DocumentCollection c({"banana", "ana"});
  GSTree t(c);
  auto pats = locus_patterns(t);
  std::set<NodeId> seen;
  for (const auto& p : pats) CHECK(seen.insert(t.locus(p).value()).second);
  CHECK(std::find(pats.begin(), pats.end(), "ana") != pats.end());
}

TEST_CASE("corpus grid covers every score kind") {
  auto g = corpus_grid(4, 800, {ScoreKind::kFrequency, ScoreKind::kStatic});
  CHECK(g.size() == 8);
  for (const auto& s : g) {
    CHECK(s.n <= 800);
    CHECK(s.docs * 4 <= s.n);
  }
}

TEST_CASE("individual checks pass on small corpora") {
  auto specs = corpus_grid(2, 300, {ScoreKind::kFrequency, ScoreKind::kMinDist, ScoreKind::kStatic});
  CHECK(check_oracle_equivalence(specs).pass());
  CHECK(check_link_uniqueness(specs).pass());
  CHECK(check_link_bound(specs).pass());
  CHECK(check_rank_components(specs, {1, 4, 64}, false).pass());
  CHECK(check_threshold(specs, 300).pass());
  CHECK(check_candidate_trees(specs).pass());
  CHECK(check_geometry(5, 500, 200).pass());
  CHECK(check_ram_work(specs, 300).pass());
}

TEST_CASE("a corrupted link target is caught") {
  auto specs = corpus_grid(1, 200, {ScoreKind::kFrequency});
  auto ck = check_link_uniqueness(specs, true);
  CHECK_FALSE(ck.pass());
  CHECK(ck.failures.size() >= 1);
}

TEST_CASE("io tapes are deterministic") {
  BuildOptions opt;
  opt.block_words = 4;
  auto c = random_collection(11, 10, 2000, 4);
  auto a = Index::build(c, opt);
  auto b = Index::build(c, opt);
  for (std::string p : {"a", "ab", "cab", "dddd"}) {
    for (std::uint64_t k : {1, 3, 40}) {
      auto x = a.query(p, k), y = b.query(p, k);
      for (unsigned ph = 0; ph < kPhaseCount; ++ph) {
        CHECK(x.tape.phase(static_cast<Phase>(ph)) == y.tape.phase(static_cast<Phase>(ph)));
      }
    }
  }
}

TEST_CASE("verify sweep report") {
  VerifyConfig cfg;
  cfg.max_n = 200;
  cfg.seeds = 1;
  auto r = verify_sweep(cfg);
  CHECK(r["pass"].get<bool>());
  CHECK(r["checks"].size() == 9);
  cfg.fault = true;
  CHECK_FALSE(verify_sweep(cfg)["pass"].get<bool>());
  cfg.max_n = 5;
  CHECK_THROWS_AS(verify_sweep(cfg), Error);
}

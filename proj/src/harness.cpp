#include "tkdr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace tkdr::harness {

namespace {

constexpr std::size_t kMaxFailures = 5;

// Links stabbed by each node, best first: walk from the origin up to the target.
std::vector<std::vector<LinkId>> stabbed_lists(const TreeShape& sh, std::span<const Link> links) {
  std::vector<std::vector<LinkId>> out(sh.node_count() + 1);
  for (LinkId i = 0; i < links.size(); ++i) {
    for (NodeId v = links[i].origin; v != links[i].target && v != kDummyNode; v = sh.parent[v]) out[v].push_back(i);
  }
  for (auto& l : out) {
    std::sort(l.begin(), l.end(), [&](LinkId a, LinkId b) { return links[a].score > links[b].score; });
  }
  return out;
}

std::vector<std::uint64_t> find_all(std::string_view text, std::string_view p) {
  std::vector<std::uint64_t> occ;
  if (p.empty()) {
    for (std::size_t i = 0; i < text.size(); ++i) occ.push_back(i);
    return occ;
  }
  for (auto pos = text.find(p); pos != std::string_view::npos; pos = text.find(p, pos + 1)) occ.push_back(pos);
  return occ;
}

std::string printable(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\0') out += "\\0"; else out += c;
  }
  return out;
}

std::vector<std::pair<DocId, std::int64_t>> as_pairs(const std::vector<Hit>& hits) {
  std::vector<std::pair<DocId, std::int64_t>> v;
  for (const auto& h : hits) v.emplace_back(h.doc, h.raw);
  return v;
}

std::vector<std::pair<DocId, std::int64_t>> as_pairs(const std::vector<OracleHit>& hits) {
  std::vector<std::pair<DocId, std::int64_t>> v;
  for (const auto& h : hits) v.emplace_back(h.doc, h.raw);
  return v;
}

struct Built {
  DocumentCollection c;
  GSTree tree;
  Scorer scorer;
  std::vector<Link> links;
};

Built build_spec(const CorpusSpec& s) {
  auto c = random_collection(s.seed, s.docs, s.n, s.sigma);
  GSTree t(c);
  auto scorer = make_scorer(s.kind, c.doc_count(), s.seed);
  auto links = build_links(t, c, scorer);
  return Built{std::move(c), std::move(t), std::move(scorer), std::move(links)};
}

double iterated_log2(double x, unsigned times) {
  for (unsigned i = 0; i < times; ++i) x = x > 1.0 ? std::log2(x) : 0.0;
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------

DocumentCollection random_collection(std::uint64_t seed, std::size_t docs, std::uint64_t n, int sigma) {
  if (docs < 1 || n < 2 * docs || sigma < 1 || sigma > 26) throw Error(ErrorCode::kInvalidArgument, "bad corpus shape");
  std::mt19937_64 rng(seed);
  const std::uint64_t body = n - docs;
  // random composition of body into docs positive parts
  std::vector<std::uint64_t> cuts;
  std::uniform_int_distribution<std::uint64_t> pick(1, body - 1);
  std::set<std::uint64_t> seen;
  while (seen.size() + 1 < docs) seen.insert(pick(rng));
  cuts.assign(seen.begin(), seen.end());
  cuts.insert(cuts.begin(), 0);
  cuts.push_back(body);
  std::uniform_int_distribution<int> ch(0, sigma - 1);
  std::vector<std::string> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string s(cuts[d + 1] - cuts[d], 'a');
    for (auto& c : s) c = static_cast<char>('a' + ch(rng));
    out.push_back(std::move(s));
  }
  return DocumentCollection(std::move(out));
}

Scorer make_scorer(ScoreKind kind, std::size_t docs, std::uint64_t seed) {
  Scorer s;
  s.kind = kind;
  if (kind == ScoreKind::kStatic) {
    std::mt19937_64 rng(seed * 7919 + 3);
    std::uniform_int_distribution<std::int64_t> w(0, 99);
    for (std::size_t d = 0; d < docs; ++d) s.static_weights.push_back(w(rng));
  }
  return s;
}

std::vector<OracleHit> oracle_topk(const DocumentCollection& c, std::string_view pattern, std::uint64_t k,
                                   const Scorer& scorer) {
  std::vector<OracleHit> out;
  if (k == 0 || pattern.empty()) return out;
  for (DocId d = 1; d <= c.doc_count(); ++d) {
    auto occ = find_all(c.doc(d), pattern);
    if (occ.empty()) continue;
    out.push_back(OracleHit{d, score(occ, scorer, d, c.size())});
  }
  std::sort(out.begin(), out.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.raw != b.raw ? a.raw > b.raw : a.doc < b.doc;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<LinkId> oracle_stabbed(const TreeShape& tree, std::span<const Link> links, NodeId u, Score tau) {
  std::vector<LinkId> out;
  for (LinkId i = 0; i < links.size(); ++i) {
    if (stabs(links[i], u, tree) && links[i].score >= tau) out.push_back(i);
  }
  return out;
}

std::vector<std::string> locus_patterns(const GSTree& tree) {
  std::vector<std::string> out;
  for (NodeId u = 2; u <= tree.node_count(); ++u) {
    std::string p = tree.prefix(u);
    if (!p.empty() && p.back() == kTerminator) p.pop_back();
    if (p.empty()) continue;
    if (tree.locus(p) == u) out.push_back(std::move(p));
  }
  return out;
}

json CorpusSpec::to_json() const {
  return {{"seed", seed}, {"docs", docs}, {"n", n}, {"sigma", sigma}, {"score", to_string(kind)}};
}

std::vector<CorpusSpec> corpus_grid(std::size_t count, std::uint64_t max_n, const std::vector<ScoreKind>& kinds,
                                    std::uint64_t first_seed) {
  static constexpr int kSigmas[] = {2, 4, 26};
  std::vector<CorpusSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    CorpusSpec s;
    s.seed = first_seed + i;
    s.sigma = kSigmas[i % 3];
    s.docs = 2 + static_cast<std::size_t>((s.seed * 7919) % 49);
    s.n = std::max<std::uint64_t>(max_n * (1 + i % 4) / 4, 20);
    s.docs = std::min<std::size_t>(s.docs, s.n / 4);
    for (auto k : kinds) {
      s.kind = k;
      out.push_back(s);
    }
  }
  return out;
}

void Check::record(bool ok, const json& repro) {
  ++checked;
  if (ok) return;
  ++violations;
  if (failures.size() < kMaxFailures) failures.push_back(repro);
}

json Check::to_json() const {
  return {{"name", name}, {"checked", checked}, {"violations", violations}, {"pass", pass()}, {"stats", stats},
          {"failures", failures}};
}

// ---------------------------------------------------------------------------

Check check_oracle_equivalence(const std::vector<CorpusSpec>& specs) {
  Check ck{"oracle_equivalence"};
  static constexpr std::uint64_t kBlocks[] = {1, 2, 4, 16};
  std::uint64_t loci = 0;
  for (const auto& s : specs) {
    auto c = random_collection(s.seed, s.docs, s.n, s.sigma);
    BuildOptions opt;
    opt.scorer = make_scorer(s.kind, c.doc_count(), s.seed);
    opt.block_words = kBlocks[s.seed % 4];
    opt.ram = true;
    const Scorer scorer = opt.scorer;
    const DocumentCollection copy = c;
    GSTree probe(c);
    opt.levels = std::min(2u, max_levels(probe.leaf_count()));
    auto idx = Index::build(std::move(c), opt);
    for (const auto& p : locus_patterns(idx.tree())) {
      ++loci;
      auto full = oracle_topk(copy, p, ~std::uint64_t{0}, scorer);
      const std::uint64_t nd = full.size();
      std::set<std::uint64_t> ks{1, 2, std::max<std::uint64_t>(1, nd / 2), nd, 2 * nd};
      for (auto k : ks) {
        if (k == 0) continue;
        auto want = as_pairs(std::vector<OracleHit>(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(std::min(k, nd))));
        json repro = s.to_json();
        repro["pattern"] = printable(p);
        repro["k"] = k;
        auto em = as_pairs(idx.query(p, k, Engine::kEm).hits);
        std::sort(em.begin(), em.end(), [](auto& a, auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
        repro["engine"] = "em";
        ck.record(em == want, repro);
        auto ram = as_pairs(idx.query(p, k, Engine::kRam).hits);
        repro["engine"] = "ram";
        ck.record(ram == want, repro);
      }
    }
  }
  ck.stats["corpora"] = specs.size();
  ck.stats["loci"] = loci;
  return ck;
}

Check check_link_uniqueness(const std::vector<CorpusSpec>& specs, bool fault) {
  Check ck{"link_uniqueness"};
  for (const auto& s : specs) {
    auto b = build_spec(s);
    if (fault) {
      for (auto& l : b.links) {
        if (l.target != kDummyNode) {
          l.target = kDummyNode;
          break;
        }
      }
    }
    const auto& sh = b.tree.shape();
    auto stabbed = stabbed_lists(sh, b.links);
    for (NodeId u = 1; u <= b.tree.node_count(); ++u) {
      std::set<DocId> present;
      for (NodeId v = u; v <= sh.subtree_end[u]; ++v) {
        if (sh.is_leaf(v)) present.insert(b.tree.leaf_doc(v));
      }
      std::map<DocId, std::vector<LinkId>> by_doc;
      for (LinkId i : stabbed[u]) by_doc[b.links[i].doc].push_back(i);
      const std::string p = b.tree.prefix(u);
      for (DocId d = 1; d <= b.c.doc_count(); ++d) {
        json repro = s.to_json();
        repro["node"] = u;
        repro["doc"] = d;
        auto it = by_doc.find(d);
        const std::size_t cnt = it == by_doc.end() ? 0 : it->second.size();
        if (!present.count(d)) {
          if (cnt) ck.record(false, repro);
          continue;
        }
        bool ok = cnt == 1;
        if (ok) {
          std::string body(b.c.doc(d));
          body.push_back(kTerminator);
          auto occ = find_all(body, p);
          ok = !occ.empty() && b.links[it->second[0]].raw == score(occ, b.scorer, d, b.c.size());
        }
        ck.record(ok, repro);
      }
    }
  }
  ck.stats["corpora"] = specs.size();
  ck.stats["fault_injected"] = fault;
  return ck;
}

Check check_link_bound(const std::vector<CorpusSpec>& specs) {
  Check ck{"link_count_bound"};
  double worst = 0;
  for (const auto& s : specs) {
    auto b = build_spec(s);
    const auto n = b.tree.leaf_count();
    worst = std::max(worst, static_cast<double>(b.links.size()) / static_cast<double>(n));
    json repro = s.to_json();
    repro["links"] = b.links.size();
    ck.record(b.links.size() <= 2 * n, repro);
  }
  ck.stats["max_links_per_n"] = worst;
  return ck;
}

Check check_rank_components(const std::vector<CorpusSpec>& specs, const std::vector<std::uint64_t>& blocks,
                            bool literal) {
  Check ck{"rank_components"};
  std::uint64_t lit_mismatch = 0, lit_branching = 0, nodes = 0;
  std::map<std::string, std::uint64_t> sub;
  for (const auto& s : specs) {
    auto b = build_spec(s);
    const auto& sh = b.tree.shape();
    for (auto B : blocks) {
      ThresholdIndex idx(sh, b.links, B);
      auto lit = [&](NodeId u) -> unsigned {
        const auto blocks_ = (sh.size[u] + B - 1) / B;
        return blocks_ <= 1 ? 0 : floor_log2(blocks_);
      };
      auto fail = [&](const char* what, NodeId u) {
        json r = s.to_json();
        r["B"] = B;
        r["node"] = u;
        r["what"] = what;
        return r;
      };
      for (NodeId u = 1; u <= b.tree.node_count(); ++u) {
        ++nodes;
        const bool direct = idx.rank(u) == node_rank(sh.size[u], B);
        ck.record(direct, fail("rank differs from direct evaluation", u));
        sub["direct"] += !direct;
        const bool lit_ok = idx.rank(u) == lit(u);
        lit_mismatch += !lit_ok;
        if (literal) {
          ck.record(lit_ok, fail("rank differs from floor(log2(ceil(size/B)))", u));
          sub["literal"] += !lit_ok;
        }
        unsigned same = 0, lit_same = 0;
        for (NodeId c : sh.children(u)) {
          same += idx.rank(c) == idx.rank(u);
          lit_same += lit(c) == lit(u);
        }
        lit_branching += lit(u) >= 1 && lit_same > 1;
        if (idx.rank(u) >= 1) {
          ck.record(same <= 1, fail("two children share the node's rank", u));
          sub["one_child"] += same > 1;
        }
        if (u > 1) {
          const bool mono = idx.rank(u) <= idx.rank(sh.parent[u]);
          ck.record(mono, fail("rank increases downward", u));
        }
      }
      for (std::uint32_t ci = 0; ci < idx.components().size(); ++ci) {
        const auto& comp = idx.components()[ci];
        if (comp.rank == 0) {
          std::uint64_t leaves = 0;
          for (NodeId v = comp.top; v <= sh.subtree_end[comp.top]; ++v) leaves += sh.is_leaf(v);
          const bool lb = leaves <= B, kb = idx.component_list(ci).size() <= 2 * B;
          ck.record(lb, fail("rank-0 component has more than B leaves", comp.top));
          ck.record(kb, fail("rank-0 component has more than 2B links", comp.top));
          sub["rank0_leaves"] += !lb;
          sub["rank0_links"] += !kb;
        } else {
          bool path = true;
          for (std::size_t i = 1; i < comp.path.size(); ++i) path = path && sh.parent[comp.path[i]] == comp.path[i - 1];
          ck.record(path, fail("component is not a downward path", comp.top));
          sub["path"] += !path;
        }
      }
    }
  }
  ck.stats["nodes"] = nodes;
  ck.stats["literal_formula_mismatches"] = lit_mismatch;
  ck.stats["literal_formula_branching_nodes"] = lit_branching;
  ck.stats["literal_counted"] = literal;
  ck.stats["violations_by_kind"] = sub;
  return ck;
}

Check check_threshold(const std::vector<CorpusSpec>& specs, std::uint64_t samples) {
  Check ck{"threshold_decomposition"};
  static constexpr std::uint64_t kBlocks[] = {1, 2, 4, 16, 64};
  std::uint64_t outputs = 0, removal = 0;
  for (const auto& s : specs) {
    auto b = build_spec(s);
    const auto& sh = b.tree.shape();
    const auto B = kBlocks[s.seed % 5];
    ThresholdIndex idx(sh, b.links, B);
    auto stabbed = stabbed_lists(sh, b.links);
    std::mt19937_64 rng(s.seed * 31 + 1);
    const NodeId m = b.tree.node_count();
    const Score top = static_cast<Score>(b.links.size() + 1);
    for (std::uint64_t i = 0; i < samples; ++i) {
      const NodeId u = static_cast<NodeId>(1 + rng() % m);
      Score tau = 1;
      switch (rng() % 4) {
        case 0: tau = 1; break;
        case 1: tau = static_cast<Score>(1 + rng() % top); break;
        case 2: tau = stabbed[u].empty() ? top : b.links[stabbed[u][rng() % stabbed[u].size()]].score; break;
        default: tau = i % 50 == 0 ? top : static_cast<Score>(1 + rng() % top); break;
      }
      std::vector<LinkId> want;
      for (LinkId id : stabbed[u]) {
        if (b.links[id].score >= tau) want.push_back(id);
      }
      std::sort(want.begin(), want.end());
      ThresholdIndex::Trace tr;
      std::vector<LinkId> got;
      IoTape tape(B);
      idx.query(u, tau, got, &tape, &tr);
      outputs += got.size();
      std::sort(got.begin(), got.end());
      const unsigned ru = idx.rank(u);
      bool ok = got == want;
      std::set<LinkId> eq(tr.equi.begin(), tr.equi.end());
      for (LinkId id : tr.high) ok = ok && !eq.count(id) && idx.link_rank(id) > ru;
      for (LinkId id : tr.equi) ok = ok && idx.link_rank(id) == ru;
      ok = ok && tr.groups.size() == idx.max_rank() - ru;
      for (unsigned r : tr.groups) ok = ok && r > ru;
      ok = ok && idx.components()[tr.component].rank == ru;
      json repro = s.to_json();
      repro["B"] = B;
      repro["node"] = u;
      repro["tau"] = tau;
      ck.record(ok, repro);
    }
    // dropping every link of lower rank than u leaves u's answers unchanged
    for (int rep = 0; rep < 4; ++rep) {
      const NodeId u = static_cast<NodeId>(1 + rng() % m);
      std::vector<Link> kept;
      for (LinkId id = 0; id < b.links.size(); ++id) {
        if (idx.link_rank(id) >= idx.rank(u)) kept.push_back(b.links[id]);
      }
      ThresholdIndex reduced(sh, kept, B);
      for (Score tau : {Score{1}, static_cast<Score>(1 + rng() % top)}) {
        std::multiset<std::tuple<NodeId, NodeId, DocId, Score>> a, c2;
        for (LinkId id : idx.query(u, tau)) a.emplace(b.links[id].origin, b.links[id].target, b.links[id].doc, b.links[id].score);
        for (LinkId id : reduced.query(u, tau)) c2.emplace(kept[id].origin, kept[id].target, kept[id].doc, kept[id].score);
        ++removal;
        json repro = s.to_json();
        repro["node"] = u;
        repro["tau"] = tau;
        repro["what"] = "low-ranked removal changed the answer";
        ck.record(a == c2, repro);
      }
    }
  }
  ck.stats["samples_per_corpus"] = samples;
  ck.stats["reported_links"] = outputs;
  ck.stats["removal_checks"] = removal;
  return ck;
}

Check check_sketch_bounds(const std::vector<CorpusSpec>& specs) {
  Check ck{"sketch_conversion_bounds"};
  static constexpr std::uint64_t kBlocks[] = {1, 2, 4, 16};
  double worst = 0, worst_excess = 0;
  std::uint64_t fallbacks = 0, entries = 0;
  for (const auto& s : specs) {
    auto b = build_spec(s);
    const auto& sh = b.tree.shape();
    const auto B = kBlocks[s.seed % 4];
    const auto n = b.tree.leaf_count();
    ThresholdIndex idx(sh, b.links, B);
    const auto g = grouping_factor(n, B, 1);
    MarkedSet ms(sh, Lca(sh), g);
    Sketch sk(idx, ms);
    auto stabbed = stabbed_lists(sh, b.links);
    for (NodeId u : ms.marked_nodes()) {
      auto e = sk.entries(u);
      bool ok = sk.stabbed_count(u) == stabbed[u].size();
      std::size_t i = 0;
      for (std::size_t q = 1; q <= stabbed[u].size(); q *= 2, ++i) {
        ok = ok && i < e.size() && e[i] == b.links[stabbed[u][q - 1]].score;
      }
      ok = ok && i == e.size();
      ++entries;
      json repro = s.to_json();
      repro["node"] = u;
      repro["what"] = "sketch entry differs from order statistic";
      ck.record(ok, repro);
    }
    for (NodeId u = 1; u <= b.tree.node_count(); ++u) {
      const std::uint64_t nd = stabbed[u].size();
      std::set<std::uint64_t> ks{1, 2, std::max<std::uint64_t>(1, nd / 2), std::max<std::uint64_t>(1, nd), 2 * nd + 1, g, 3 * g};
      for (auto k : ks) {
        auto t = threshold_for(ms, sk, u, sh.subtree_end[u], k, 2 * g);
        fallbacks += t.fallback;
        const std::uint64_t z = idx.query(u, t.tau).size();
        const double bound = 2.0 * static_cast<double>(k + 2 * g);
        worst = std::max(worst, static_cast<double>(z) / static_cast<double>(k + 2 * g));
        worst_excess = std::max(worst_excess, static_cast<double>(z) - bound);
        json repro = s.to_json();
        repro["B"] = B;
        repro["g"] = g;
        repro["node"] = u;
        repro["k"] = k;
        repro["z"] = z;
        ck.record(z >= std::min(k, nd) && static_cast<double>(z) <= bound, repro);
      }
    }
  }
  ck.stats["max_z_over_k_plus_2g"] = worst;
  ck.stats["max_excess_over_bound"] = worst_excess;
  ck.stats["fallbacks"] = fallbacks;
  ck.stats["sketched_nodes"] = entries;
  return ck;
}

Check check_candidate_trees(const std::vector<CorpusSpec>& specs) {
  Check ck{"candidate_trees"};
  static constexpr std::uint64_t kBlocks[] = {1, 2, 4};
  std::uint64_t trees = 0, routed = 0;
  double fringe_ratio = 0, near_ratio = 0, cand_ratio = 0;
  for (const auto& s : specs) {
    auto b = build_spec(s);
    const auto& sh = b.tree.shape();
    const auto B = kBlocks[s.seed % 3];
    const unsigned h = std::min(2u, max_levels(b.tree.leaf_count()));
    TopKIndex idx(b.tree, b.links, B, h);
    auto stabbed = stabbed_lists(sh, b.links);
    for (unsigned lv = 1; lv <= idx.level_count(); ++lv) {
      const auto& level = idx.level(lv);
      const auto g = level.g;
      for (std::size_t i = 0; i < level.primes.size(); ++i) {
        const NodeId p = level.primes[i];
        const auto& ct = level.trees[i];
        ++trees;
        auto cls = classify_links(sh, b.links, level.marks, p);
        json repro = s.to_json();
        repro["B"] = B;
        repro["level"] = lv;
        repro["g"] = g;
        repro["prime"] = p;
        std::uint64_t inside = 0;
        for (const auto& l : b.links) inside += l.origin >= p && l.origin <= sh.subtree_end[p];
        repro["what"] = "fringe count";
        ck.record(cls.fringe.size() <= 4 * g, repro);
        repro["what"] = "near count";
        ck.record(cls.near.size() <= 4 * g, repro);
        repro["what"] = "candidate count";
        ck.record(ct.links().size() <= 9 * g, repro);
        repro["what"] = "partition";
        ck.record(cls.fringe.size() + cls.near.size() + cls.far.size() + cls.small.size() == inside &&
                      ct.fringe_count() == cls.fringe.size() && ct.near_count() == cls.near.size(),
                  repro);
        const double gd = static_cast<double>(g);
        fringe_ratio = std::max(fringe_ratio, static_cast<double>(cls.fringe.size()) / gd);
        near_ratio = std::max(near_ratio, static_cast<double>(cls.near.size()) / gd);
        cand_ratio = std::max(cand_ratio, static_cast<double>(ct.links().size()) / gd);
        std::set<LinkId> cand(ct.sources().begin(), ct.sources().end());
        for (NodeId u = p; u <= sh.subtree_end[p]; ++u) {
          if (level.marks.lowest_prime(u) != p) continue;
          if (ct.ustar() && u != ct.ustar() && sh.is_ancestor(ct.ustar(), u)) continue;
          ++routed;
          bool ok = true;
          for (std::size_t j = 0; j < std::min<std::size_t>(g, stabbed[u].size()); ++j) ok = ok && cand.count(stabbed[u][j]);
          repro["what"] = "top-g not among candidates";
          repro["node"] = u;
          ck.record(ok, repro);
        }
        repro.erase("node");
      }
    }
  }
  ck.stats["trees"] = trees;
  ck.stats["routed_nodes"] = routed;
  ck.stats["max_fringe_over_g"] = fringe_ratio;
  ck.stats["max_near_over_g"] = near_ratio;
  ck.stats["max_candidates_over_g"] = cand_ratio;
  return ck;
}

Check check_geometry(std::uint64_t seed, std::size_t size, std::size_t queries) {
  Check ck{"geometry"};
  std::mt19937_64 rng(seed);
  std::map<std::string, std::uint64_t> per;
  auto rec = [&](const char* what, bool ok, json extra = json::object()) {
    ++per[what];
    extra["structure"] = what;
    extra["seed"] = seed;
    ck.record(ok, extra);
  };

  {  // BitVec
    std::vector<bool> bits(size);
    for (std::size_t i = 0; i < size; ++i) bits[i] = rng() % 3 == 0;
    BitVec bv(bits);
    std::vector<std::uint64_t> pre(size + 1, 0), ones, zeros;
    for (std::size_t i = 0; i < size; ++i) {
      pre[i + 1] = pre[i] + bits[i];
      (bits[i] ? ones : zeros).push_back(i + 1);
    }
    for (std::size_t q = 0; q < queries; ++q) {
      const std::uint64_t pos = rng() % (size + 1);
      bool ok = bv.rank1(pos) == pre[pos] && bv.rank0(pos) == pos - pre[pos];
      if (!ones.empty()) {
        const auto i = 1 + rng() % ones.size();
        ok = ok && bv.select1(i) == ones[i - 1];
      }
      if (!zeros.empty()) {
        const auto i = 1 + rng() % zeros.size();
        ok = ok && bv.select0(i) == zeros[i - 1];
      }
      rec("bitvec", ok, {{"pos", pos}});
    }
  }
  {  // RankDict
    std::vector<std::uint64_t> vals(size);
    for (auto& v : vals) v = rng() % size;
    RankDict rd(vals);
    std::sort(vals.begin(), vals.end());
    for (std::size_t q = 0; q < queries; ++q) {
      const auto x = static_cast<std::int64_t>(rng() % (size + 2)) - 1;
      const auto want = static_cast<std::uint64_t>(std::lower_bound(vals.begin(), vals.end(), x < 0 ? 0 : static_cast<std::uint64_t>(x)) - vals.begin());
      const auto i = 1 + rng() % vals.size();
      rec("rankdict", rd.rank_of(x) == (x < 0 ? 0 : want) && rd.select_pos(i) == vals[i - 1], {{"x", x}});
    }
  }
  for (std::uint64_t B : {1ul, 16ul, 64ul}) {  // ThreeSided
    std::vector<Point2> pts;
    for (std::uint32_t i = 0; i < size; ++i) {
      pts.push_back(Point2{i + 1, static_cast<std::uint32_t>(1 + rng() % size), i});
    }
    ThreeSided ts(pts, B);
    for (std::size_t q = 0; q < queries / 3 + 1; ++q) {
      auto x1 = static_cast<std::uint32_t>(1 + rng() % size), x2 = static_cast<std::uint32_t>(1 + rng() % size);
      if (x1 > x2) std::swap(x1, x2);
      const auto tau = static_cast<std::uint32_t>(1 + rng() % (size + 1));
      std::vector<std::uint32_t> want, got;
      for (const auto& p : pts) {
        if (p.x >= x1 && p.x <= x2 && p.y >= tau) want.push_back(p.payload);
      }
      std::vector<Point2> out;
      ts.query(x1, x2, tau, out);
      for (const auto& p : out) got.push_back(p.payload);
      std::sort(got.begin(), got.end());
      rec("three_sided", got == want, {{"B", B}, {"x1", x1}, {"x2", x2}, {"tau", tau}});
    }
  }
  {  // PersistentStabbing
    std::vector<WeightedInterval> iv;
    for (std::uint32_t i = 0; i < size; ++i) {
      auto a = static_cast<std::uint32_t>(1 + rng() % size), b = static_cast<std::uint32_t>(1 + rng() % size);
      if (a > b) std::swap(a, b);
      iv.push_back(WeightedInterval{a, b, static_cast<Score>(1 + rng() % (4 * size)), i});
    }
    PersistentStabbing ps(iv);
    for (std::size_t q = 0; q < queries; ++q) {
      const auto x = static_cast<std::uint32_t>(1 + rng() % size);
      const auto tau = static_cast<Score>(1 + rng() % (4 * size));
      std::vector<Score> want;
      std::vector<std::uint32_t> want_ids, got_ids;
      for (const auto& w : iv) {
        if (w.start <= x && x <= w.end && w.weight >= tau) {
          want.push_back(w.weight);
          want_ids.push_back(w.payload);
        }
      }
      std::sort(want.begin(), want.end(), std::greater<>());
      std::vector<Score> got;
      for (const auto& it : ps.stab_all(x, tau)) {
        got.push_back(it.score);
        got_ids.push_back(it.payload);
      }
      std::sort(want_ids.begin(), want_ids.end());
      std::sort(got_ids.begin(), got_ids.end());
      rec("persistent_stabbing", got == want && got_ids == want_ids, {{"x", x}, {"tau", tau}});
    }
  }
  {  // OnlineSortedRange
    std::vector<Score> vals(size);
    for (auto& v : vals) v = static_cast<Score>(rng() % (2 * size));
    OnlineSortedRange osr(vals);
    for (std::size_t q = 0; q < queries; ++q) {
      auto i = 1 + rng() % size, j = 1 + rng() % size;
      if (i > j) std::swap(i, j);
      std::vector<Score> want(vals.begin() + static_cast<std::ptrdiff_t>(i - 1), vals.begin() + static_cast<std::ptrdiff_t>(j));
      std::sort(want.begin(), want.end(), std::greater<>());
      const std::size_t m = 1 + rng() % want.size();
      want.resize(m);
      auto cur = osr.query(i, j);
      std::vector<Score> got;
      bool pos_ok = true;
      while (got.size() < m) {
        auto it = cur.next();
        if (!it) break;
        got.push_back(it->score);
        pos_ok = pos_ok && it->payload >= i && it->payload <= j && vals[it->payload - 1] == it->score;
      }
      rec("sorted_range", got == want && pos_ok, {{"i", i}, {"j", j}});
    }
  }
  ck.stats["queries_by_structure"] = per;
  ck.stats["size"] = size;
  return ck;
}

Check check_ram_work(const std::vector<CorpusSpec>& specs, std::uint64_t samples) {
  Check ck{"ram_work"};
  std::uint64_t small = 0, large = 0, max_pops_excess = 0;
  for (const auto& s : specs) {
    auto b = build_spec(s);
    const auto& sh = b.tree.shape();
    RamIndex idx(b.tree, b.links);
    auto stabbed = stabbed_lists(sh, b.links);
    std::mt19937_64 rng(s.seed * 131 + 5);
    const NodeId m = b.tree.node_count();
    const auto g = idx.g();
    for (std::uint64_t i = 0; i < samples; ++i) {
      const NodeId u = static_cast<NodeId>(1 + rng() % m);
      const std::uint64_t nd = stabbed[u].size();
      const std::uint64_t k = i % 2 == 0 && g > 1 ? 1 + rng() % (g - 1) : 1 + rng() % (2 * nd + g + 1);
      auto r = idx.query(u, k);
      bool ok = r.hits.size() == std::min(k, nd);
      for (std::size_t j = 0; ok && j < r.hits.size(); ++j) ok = r.hits[j].score == b.links[stabbed[u][j]].score;
      if (r.small_path) {
        ++small;
        ok = ok && r.select_calls == std::min(k, nd);
      } else {
        ++large;
        ok = ok && r.pops <= k + r.streams;
        if (r.pops > k) max_pops_excess = std::max(max_pops_excess, r.pops - k);
      }
      json repro = s.to_json();
      repro["node"] = u;
      repro["k"] = k;
      repro["path"] = r.small_path ? "small" : "large";
      ck.record(ok, repro);
    }
  }
  ck.stats["small_path"] = small;
  ck.stats["large_path"] = large;
  ck.stats["max_pops_over_k"] = max_pops_excess;
  return ck;
}

// ---------------------------------------------------------------------------

namespace {

struct Sample {
  double io;
  double a;  // z / B
};

// Smallest c1 L + c2 a_i envelope over the samples (c1, c2 >= 0), minimizing
// the summed bound. The objective is convex in c2.
std::pair<double, double> fit_envelope(const std::vector<Sample>& s, double L) {
  double amax = 0;
  for (const auto& x : s) amax = std::max(amax, x.a);
  auto c1_for = [&](double c2) {
    double c1 = 0;
    for (const auto& x : s) c1 = std::max(c1, (x.io - c2 * x.a) / L);
    return c1;
  };
  double asum = 0;
  for (const auto& x : s) asum += x.a;
  auto cost = [&](double c2) { return static_cast<double>(s.size()) * L * c1_for(c2) + c2 * asum; };
  double lo = 0, hi = 1;
  for (const auto& x : s) {
    if (x.a > 0) hi = std::max(hi, x.io / x.a);
  }
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (cost(m1) <= cost(m2)) hi = m2; else lo = m1;
  }
  const double c2 = (lo + hi) / 2;
  return {c1_for(c2), c2};
}

}  // namespace

ScalingResult check_scaling(const ScalingConfig& cfg) {
  ScalingResult res{Check{"threshold_io_bound"}, Check{"query_io_bound"}, Check{"space_audit"}};
  json th_fits = json::object(), q_fits = json::object(), space = json::object();
  for (auto B : cfg.blocks) {
    double c1 = 0, c2 = 0, cq = 0, cs = 0;
    const std::string key = std::to_string(B);
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const auto n = cfg.sizes[si];
      auto c = random_collection(cfg.seed + n, std::min<std::size_t>(cfg.docs, n / 4), n, cfg.sigma);
      BuildOptions opt;
      opt.block_words = B;
      opt.levels = cfg.levels;
      const std::string text(c.text());
      auto idx = Index::build(std::move(c), opt);
      const auto& tk = idx.topk();
      const auto& th = tk.base();
      const double nn = static_cast<double>(idx.tree().leaf_count());
      const double L = std::max(1.0, std::log2(nn / static_cast<double>(B)));
      std::mt19937_64 rng(cfg.seed * 1000 + n + B);
      const NodeId m = idx.tree().node_count();
      const Score top = static_cast<Score>(idx.links().size() + 1);

      std::vector<Sample> ts;
      for (std::uint64_t i = 0; i < cfg.samples; ++i) {
        const NodeId u = static_cast<NodeId>(1 + rng() % m);
        Score tau = 1;
        switch (i % 4) {
          case 0: tau = 1; break;
          case 1: tau = static_cast<Score>(top / 2); break;
          default: tau = static_cast<Score>(1 + rng() % top); break;
        }
        IoTape tape(B);
        std::vector<LinkId> out;
        th.query(u, tau, out, &tape);
        ts.push_back(Sample{static_cast<double>(tape.total()), static_cast<double>(out.size()) / static_cast<double>(B)});
      }
      struct QS {
        double io, x;
      };
      std::vector<QS> qs;
      static constexpr std::uint64_t kKs[] = {1, 2, 8, 32, 128};
      const double logb = B > 1 ? std::log(nn) / std::log(static_cast<double>(B)) : std::log2(nn);
      const double logh = std::max(1.0, iterated_log2(nn, cfg.levels));
      for (std::uint64_t i = 0; i < cfg.samples; ++i) {
        const std::size_t p = 1 + rng() % 12;
        std::size_t pos = rng() % (text.size() - p);
        std::string pat = text.substr(pos, p);
        if (pat.find(kTerminator) != std::string::npos) pat = pat.substr(0, pat.find(kTerminator));
        if (pat.empty()) pat = "a";
        const auto k = kKs[i % 5];
        auto q = idx.query(pat, k);
        const double x = static_cast<double>(pat.size()) / static_cast<double>(B) + logb + logh +
                         static_cast<double>(k) / static_cast<double>(B);
        qs.push_back(QS{static_cast<double>(q.tape.total()), x});
      }
      const double words = static_cast<double>(tk.word_count());
      const double ratio = words / (nn * cfg.levels);

      if (si == 0) {
        std::tie(c1, c2) = fit_envelope(ts, L);
        for (const auto& q : qs) cq = std::max(cq, q.io / q.x);
        cs = ratio;
        th_fits[key] = {{"c1", c1}, {"c2", c2}, {"c3", 0.0}, {"fit_n", n}};
        q_fits[key] = {{"c", cq}, {"fit_n", n}};
        space[key] = {{"c", cs}, {"fit_n", n}, {"ratios", json::array()}};
      }
      double worst_t = 0, worst_q = 0;
      for (const auto& s : ts) {
        const double bound = c1 * L + c2 * s.a;
        worst_t = std::max(worst_t, bound > 0 ? s.io / bound : (s.io > 0 ? 1e9 : 0));
        if (si > 0) res.threshold_io.record(s.io <= cfg.slack * bound, {{"B", B}, {"n", n}, {"io", s.io}, {"z_over_B", s.a}});
      }
      for (const auto& q : qs) {
        const double bound = cq * q.x;
        worst_q = std::max(worst_q, q.io / bound);
        if (si > 0) res.query_io.record(q.io <= cfg.slack * bound, {{"B", B}, {"n", n}, {"io", q.io}, {"x", q.x}});
      }
      th_fits[key]["max_ratio_n" + std::to_string(n)] = worst_t;
      q_fits[key]["max_ratio_n" + std::to_string(n)] = worst_q;
      space[key]["ratios"].push_back({{"n", n}, {"words", words}, {"words_per_nh", ratio}});
      res.space.record(std::abs(ratio / cs - 1.0) <= cfg.space_band, {{"B", B}, {"n", n}, {"words_per_nh", ratio}, {"c", cs}});
    }
  }
  res.threshold_io.stats["fits"] = th_fits;
  res.query_io.stats["fits"] = q_fits;
  res.space.stats["fits"] = space;
  for (auto* c : {&res.threshold_io, &res.query_io}) {
    c->stats["slack"] = cfg.slack;
    c->stats["samples_per_cell"] = cfg.samples;
  }
  res.space.stats["band"] = cfg.space_band;
  return res;
}

json verify_sweep(const VerifyConfig& cfg) {
  const std::uint64_t cap = std::min<std::uint64_t>(cfg.max_n, 2000);
  if (cap < 20 || cfg.seeds < 1 || cfg.kinds.empty()) throw Error(ErrorCode::kInvalidArgument, "verify bounds too small");
  auto specs = corpus_grid(cfg.seeds, cap, cfg.kinds);
  auto small = corpus_grid(cfg.seeds, std::min<std::uint64_t>(cap, 500), cfg.kinds);
  auto mid = corpus_grid(cfg.seeds, std::min<std::uint64_t>(cap, 1000), cfg.kinds);
  std::vector<Check> checks;
  checks.push_back(check_oracle_equivalence(specs));
  checks.push_back(check_link_uniqueness(small, cfg.fault));
  checks.push_back(check_link_bound(specs));
  checks.push_back(check_rank_components(specs, {1, 2, 4, 16, 64}, false));
  checks.push_back(check_threshold(specs, 2000));
  checks.push_back(check_sketch_bounds(specs));
  checks.push_back(check_candidate_trees(mid));
  checks.push_back(check_geometry(1, std::min<std::uint64_t>(10000, std::max<std::uint64_t>(cap * 5, 1000)), 1000));
  checks.push_back(check_ram_work(specs, 2000));
  if (cfg.max_n >= 10000) {
    ScalingConfig sc;
    sc.sizes = {1000, 10000};
    if (cfg.max_n >= 100000) sc.sizes.push_back(100000);
    auto r = check_scaling(sc);
    checks.push_back(r.threshold_io);
    checks.push_back(r.query_io);
    checks.push_back(r.space);
  }
  json report;
  json kinds = json::array();
  for (auto k : cfg.kinds) kinds.push_back(to_string(k));
  report["config"] = {{"max_n", cfg.max_n}, {"seeds", cfg.seeds}, {"scores", kinds}, {"fault", cfg.fault}};
  json seeds = json::array();
  for (std::size_t i = 0; i < cfg.seeds; ++i) seeds.push_back(1 + i);
  report["seeds"] = seeds;
  json corpora = json::array();
  for (const auto& s : specs) corpora.push_back(s.to_json());
  report["corpora"] = corpora;
  bool pass = true;
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back(c.to_json());
    pass = pass && c.pass();
  }
  report["checks"] = arr;
  report["pass"] = pass;
  return report;
}

std::string bench(const std::vector<std::uint64_t>& sizes, const std::vector<std::uint64_t>& blocks, std::uint64_t seed) {
  std::ostringstream out;
  out << "n,B,k,queries,locus,equi,high,conversion,selection,total,wall_us\n";
  for (auto n : sizes) {
    for (auto B : blocks) {
      auto c = random_collection(seed + n, std::min<std::size_t>(50, n / 4), n, 4);
      const std::string text(c.text());
      BuildOptions opt;
      opt.block_words = B;
      opt.levels = std::min(2u, max_levels(n));
      auto idx = Index::build(std::move(c), opt);
      std::mt19937_64 rng(seed * 97 + n + B);
      std::vector<std::string> pats;
      for (int i = 0; i < 200; ++i) {
        const std::size_t p = 3 + rng() % 6;
        std::string s = text.substr(rng() % (text.size() - p), p);
        s = s.substr(0, s.find(kTerminator));
        pats.push_back(s.empty() ? "a" : s);
      }
      for (std::uint64_t k : {1ul, 8ul, 64ul}) {
        std::array<double, kPhaseCount> sum{};
        double total = 0, wall = 0;
        for (const auto& p : pats) {
          auto t0 = std::chrono::steady_clock::now();
          auto q = idx.query(p, k);
          wall += std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
          for (unsigned ph = 0; ph < kPhaseCount; ++ph) sum[ph] += static_cast<double>(q.tape.phase(static_cast<Phase>(ph)));
          total += static_cast<double>(q.tape.total());
        }
        const double m = static_cast<double>(pats.size());
        out << n << ',' << B << ',' << k << ',' << pats.size();
        for (double v : sum) out << ',' << v / m;
        out << ',' << total / m << ',' << wall / m << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace tkdr::harness

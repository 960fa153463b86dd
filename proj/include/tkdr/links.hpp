#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tkdr/gst.hpp"

namespace tkdr {

/// (origin, target, doc, score). `score` is the rank-space value used by every
/// query structure; `raw` is the relevance before reduction.
struct Link {
  NodeId origin = 0;
  NodeId target = 0;
  DocId doc = 0;
  Score score = 0;
  std::int64_t raw = 0;

  friend bool operator==(const Link&, const Link&) = default;
};

enum class ScoreKind : std::uint8_t { kFrequency = 0, kMinDist = 1, kStatic = 2 };

struct Scorer {
  ScoreKind kind = ScoreKind::kFrequency;
  std::vector<std::int64_t> static_weights;  // indexed by doc id - 1

  void save(Writer& w) const;
  static Scorer load(Reader& r);
};

std::string to_string(ScoreKind kind);
ScoreKind parse_score_kind(const std::string& s);

/// Relevance of a document given the sorted offsets of the pattern's
/// occurrences in it. `n` is the collection length (mindist sentinel).
std::int64_t score(std::span<const std::uint64_t> occurrences, const Scorer& scorer, DocId doc, std::uint64_t n);

/// marks[u] lists the documents u is marked with, ascending. marks[0] is empty;
/// the dummy is implicitly marked with every document.
using Marking = std::vector<std::vector<DocId>>;

Marking mark_documents(const GSTree& tree, std::size_t doc_count);

/// One link per (node, marked document), sorted by (origin, doc). Scores are
/// raw only; call reduce_scores_rank_space afterwards.
std::vector<Link> generate_links(const GSTree& tree, const DocumentCollection& collection, const Marking& marking,
                                 const Scorer& scorer);

/// Replaces `score` with a permutation of 1..|links|, ascending with raw score;
/// ties go higher to the smaller doc id, then the smaller origin.
void reduce_scores_rank_space(std::vector<Link>& links);

/// Origin in subtree(u) and target a proper ancestor of u.
inline bool stabs(const Link& link, NodeId u, const TreeShape& tree) {
  return tree.is_ancestor(u, link.origin) && tree.is_proper_ancestor(link.target, u);
}

/// Marking, generation and rank-space reduction in one call.
std::vector<Link> build_links(const GSTree& tree, const DocumentCollection& collection, const Scorer& scorer);

void save_links(Writer& w, const std::vector<Link>& links);
std::vector<Link> load_links(Reader& r);

}  // namespace tkdr

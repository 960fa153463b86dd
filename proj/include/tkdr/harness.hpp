#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tkdr/index.hpp"

namespace tkdr::harness {

using nlohmann::json;

DocumentCollection random_collection(std::uint64_t seed, std::size_t docs, std::uint64_t n, int sigma);
Scorer make_scorer(ScoreKind kind, std::size_t docs, std::uint64_t seed);

struct OracleHit {
  DocId doc = 0;
  std::int64_t raw = 0;
  friend bool operator==(const OracleHit&, const OracleHit&) = default;
};

/// Scans every document for P; best first (raw descending, then doc id).
std::vector<OracleHit> oracle_topk(const DocumentCollection& c, std::string_view pattern, std::uint64_t k,
                                   const Scorer& scorer);
/// Links stabbed by u with score >= tau, by enumeration.
std::vector<LinkId> oracle_stabbed(const TreeShape& tree, std::span<const Link> links, NodeId u, Score tau);
/// One pattern per distinct locus: prefix(u) without a trailing terminator.
std::vector<std::string> locus_patterns(const GSTree& tree);

struct CorpusSpec {
  std::uint64_t seed = 1;
  std::size_t docs = 2;
  std::uint64_t n = 100;
  int sigma = 4;
  ScoreKind kind = ScoreKind::kFrequency;
  json to_json() const;
};

/// `count` corpora per score kind with n up to max_n, D up to 50 and
/// alphabets cycling through {2, 4, 26}.
std::vector<CorpusSpec> corpus_grid(std::size_t count, std::uint64_t max_n, const std::vector<ScoreKind>& kinds,
                                    std::uint64_t first_seed = 1);

struct Check {
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  json stats = json::object();
  json failures = json::array();  // first few reproducers

  bool pass() const { return violations == 0 && checked > 0; }
  void record(bool ok, const json& repro = {});
  json to_json() const;
};

Check check_oracle_equivalence(const std::vector<CorpusSpec>& specs);
/// `fault` corrupts one link target before checking.
Check check_link_uniqueness(const std::vector<CorpusSpec>& specs, bool fault = false);
Check check_link_bound(const std::vector<CorpusSpec>& specs);
/// With `literal`, ranks must also equal floor(log2(ceil(size / B))).
Check check_rank_components(const std::vector<CorpusSpec>& specs, const std::vector<std::uint64_t>& blocks,
                            bool literal);
Check check_threshold(const std::vector<CorpusSpec>& specs, std::uint64_t samples);
Check check_sketch_bounds(const std::vector<CorpusSpec>& specs);
Check check_candidate_trees(const std::vector<CorpusSpec>& specs);
Check check_geometry(std::uint64_t seed, std::size_t size, std::size_t queries);
Check check_ram_work(const std::vector<CorpusSpec>& specs, std::uint64_t samples);

struct ScalingConfig {
  std::vector<std::uint64_t> sizes{1000, 10000, 100000};
  std::vector<std::uint64_t> blocks{16, 64, 256};
  unsigned levels = 2;
  std::uint64_t seed = 7;
  std::size_t docs = 50;
  int sigma = 4;
  std::uint64_t samples = 2000;
  double slack = 2.0;        // allowed factor over the fitted bound
  double space_band = 0.5;   // allowed relative drift of words / (n h)
};

struct ScalingResult {
  Check threshold_io;
  Check query_io;
  Check space;
};

/// Fits I/O and space constants at the first size and checks the rest.
ScalingResult check_scaling(const ScalingConfig& cfg);

struct VerifyConfig {
  std::uint64_t max_n = 2000;
  std::size_t seeds = 3;
  std::vector<ScoreKind> kinds{ScoreKind::kFrequency, ScoreKind::kMinDist, ScoreKind::kStatic};
  bool fault = false;
};

/// Runs every property check (and the scaling fits when max_n >= 10^4).
json verify_sweep(const VerifyConfig& cfg);

/// CSV rows: n, B, k, queries, per-phase mean I/Os, total, mean wall time.
std::string bench(const std::vector<std::uint64_t>& sizes, const std::vector<std::uint64_t>& blocks,
                  std::uint64_t seed = 7);

}  // namespace tkdr::harness

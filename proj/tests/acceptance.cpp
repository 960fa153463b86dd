// One PASS/FAIL line per acceptance property. Optional argv[1]: write the full
// JSON report there.
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "tkdr/harness.hpp"

using namespace tkdr;
using namespace tkdr::harness;

namespace {

constexpr std::size_t kCorpora = 20;            // per score kind
constexpr std::uint64_t kMaxN = 2000;
constexpr std::uint64_t kExhaustiveLinksN = 500;
constexpr std::uint64_t kExhaustiveTreesN = 1000;
constexpr std::uint64_t kThresholdSamples = 10000;  // per corpus
constexpr std::uint64_t kRamSamples = 10000;        // per corpus
constexpr std::size_t kGeometrySize = 10000;
constexpr std::size_t kGeometryQueries = 2000;     // per structure
constexpr double kIoSlack = 2.0;
constexpr double kSpaceBand = 0.5;
const std::vector<std::uint64_t> kRankBlocks{1, 2, 4, 16, 64};
const std::vector<ScoreKind> kKinds{ScoreKind::kFrequency, ScoreKind::kMinDist, ScoreKind::kStatic};

int failures = 0;
json report = json::array();

void line(int id, const std::string& title, bool pass, const std::string& detail, json data) {
  failures += !pass;
  std::cout << (pass ? "PASS" : "FAIL") << " [" << std::setw(2) << id << "] " << title << ": " << detail << std::endl;
  report.push_back({{"id", id}, {"title", title}, {"pass", pass}, {"detail", detail}, {"data", std::move(data)}});
}

std::string counts(const Check& c, const char* unit) {
  std::ostringstream s;
  s << c.checked << ' ' << unit << ", " << c.violations << " violations";
  if (!c.failures.empty()) s << "; first: " << c.failures[0].dump();
  return s.str();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << v;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  const auto specs = corpus_grid(kCorpora, kMaxN, kKinds);
  const auto small = corpus_grid(kCorpora, kExhaustiveLinksN, kKinds);
  const auto mid = corpus_grid(kCorpora, kExhaustiveTreesN, kKinds);

  {
    auto c = check_oracle_equivalence(specs);
    line(1, "oracle equivalence (em set, ram sequence)", c.pass(),
         std::to_string(specs.size()) + " corpora, " + c.stats["loci"].dump() + " loci, " + counts(c, "comparisons"),
         c.to_json());
  }
  {
    auto c = check_link_uniqueness(small);
    line(2, "one link per (node, present document) with recomputed score", c.pass(), counts(c, "node-document pairs"),
         c.to_json());
  }
  {
    auto c = check_link_bound(specs);
    line(3, "link count <= 2n", c.pass(), counts(c, "corpora") + ", max links/n " + fmt(c.stats["max_links_per_n"]),
         c.to_json());
  }
  {
    auto c = check_rank_components(specs, kRankBlocks, true);
    std::ostringstream d;
    d << counts(c, "checks") << "; by kind " << c.stats["violations_by_kind"].dump();
    line(4, "rank components (B in {1,2,4,16,64}, floor-log rank formula)", c.pass(), d.str(), c.to_json());
  }
  {
    auto c = check_threshold(specs, kThresholdSamples);
    line(5, "threshold query = enumeration, disjoint parts, low ranks untouched", c.pass(), counts(c, "samples"),
         c.to_json());
  }
  {
    auto c = check_sketch_bounds(specs);
    line(6, "min(k, ndoc) <= z <= 2(k + 2g)", c.pass(),
         counts(c, "(u, k) pairs") + ", max z/(k+2g) " + fmt(c.stats["max_z_over_k_plus_2g"]), c.to_json());
  }
  {
    auto c = check_candidate_trees(mid);
    std::ostringstream d;
    d << counts(c, "checks") << ", max fringe/g " << fmt(c.stats["max_fringe_over_g"]) << ", max near/g "
      << fmt(c.stats["max_near_over_g"]);
    line(7, "candidate trees: fringe, near <= 4g; top-g covered", c.pass(), d.str(), c.to_json());
  }
  {
    auto c = check_geometry(1, kGeometrySize, kGeometryQueries);
    line(8, "geometric structures = naive oracles", c.pass(), counts(c, "queries"), c.to_json());
  }
  {
    ScalingConfig sc;
    sc.slack = kIoSlack;
    sc.space_band = kSpaceBand;
    auto r = check_scaling(sc);
    std::ostringstream d;
    d << "threshold " << r.threshold_io.violations << "/" << r.threshold_io.checked << " over, query "
      << r.query_io.violations << "/" << r.query_io.checked << " over (slack " << kIoSlack << "x);";
    for (const auto& [b, f] : r.query_io.stats["fits"].items()) {
      d << " B=" << b << " query max ratio " << fmt(f["max_ratio_n100000"]);
    }
    line(9, "block reads within fitted bounds at n = 1e4, 1e5", r.threshold_io.pass() && r.query_io.pass(), d.str(),
         {{"threshold", r.threshold_io.to_json()}, {"query", r.query_io.to_json()}});
    std::ostringstream s;
    s << r.space.violations << "/" << r.space.checked << " outside +-" << kSpaceBand * 100 << "%;";
    for (const auto& [b, f] : r.space.stats["fits"].items()) {
      s << " B=" << b << " words/(n h)";
      for (const auto& x : f["ratios"]) s << ' ' << fmt(x["words_per_nh"]);
    }
    line(10, "space per n h stable across n", r.space.pass(), s.str(), r.space.to_json());
  }
  {
    auto c = check_ram_work(specs, kRamSamples);
    std::ostringstream d;
    d << counts(c, "queries") << " (small path " << c.stats["small_path"] << ", large path " << c.stats["large_path"]
      << ")";
    line(11, "ram work: pops <= k + streams, select calls = min(k, ndoc)", c.pass(), d.str(), c.to_json());
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (11 - failures) << "/11 passed in " << fmt(secs) << " s" << std::endl;
  if (argc > 1) std::ofstream(argv[1]) << json{{"criteria", report}, {"seconds", secs}}.dump(2) << "\n";
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tkdr/corpus.hpp"
#include "tkdr/gst.hpp"
#include "tkdr/ram.hpp"
#include "tkdr/topk.hpp"

namespace tkdr {

inline constexpr char kContainerMagic[4] = {'T', 'K', 'D', 'R'};
inline constexpr std::uint32_t kContainerVersion = 1;

struct BuildOptions {
  Scorer scorer;
  std::uint64_t block_words = 64;
  unsigned levels = 2;
  bool ram = false;
};

struct Hit {
  DocId doc = 0;
  std::int64_t raw = 0;
  Score rank = 0;
};

enum class Engine : std::uint8_t { kEm = 0, kRam = 1 };

struct QueryOutcome {
  bool matched = false;
  NodeId locus = kDummyNode;
  std::vector<Hit> hits;  // em: unsorted; ram: score-descending
  IoTape tape;
  int route = 0;
  std::uint64_t z = 0;
  std::uint64_t pops = 0;
  std::uint64_t select_calls = 0;
};

/// Everything a built collection needs to answer queries, plus the on-disk
/// container: magic, version, header, then checksummed sections.
class Index {
 public:
  static Index build(DocumentCollection collection, const BuildOptions& options);
  static Index open(const std::filesystem::path& path);
  static Index deserialize(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

  const DocumentCollection& collection() const { return *collection_; }
  const GSTree& tree() const { return *tree_; }
  const std::vector<Link>& links() const { return links_; }
  const TopKIndex& topk() const { return *topk_; }
  const RamIndex* ram() const { return ram_.get(); }
  const BuildOptions& options() const { return options_; }

  QueryOutcome query(std::string_view pattern, std::uint64_t k, Engine engine = Engine::kEm) const;

  /// n, D, link count and per-level entry counts, as a JSON object string.
  std::string build_stats_json() const;

 private:
  Index() = default;

  BuildOptions options_;
  std::unique_ptr<DocumentCollection> collection_;
  std::unique_ptr<GSTree> tree_;
  std::vector<Link> links_;
  std::unique_ptr<TopKIndex> topk_;
  std::unique_ptr<RamIndex> ram_;
};

/// One integer per line, one line per document.
std::vector<std::int64_t> load_static_weights(const std::filesystem::path& path);

}  // namespace tkdr

#include "tkdr/index.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tkdr {

namespace {

enum Section : std::uint32_t { kCorpus = 1, kScorer, kTree, kLinks, kTopK, kRam };

std::uint32_t checksum(std::string_view s) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
}

template <typename F>
std::string section(F&& fill) {
  Writer w;
  fill(w);
  return w.take();
}

}  // namespace

Index Index::build(DocumentCollection collection, const BuildOptions& options) {
  if (options.block_words < 1) throw Error(ErrorCode::kInvalidArgument, "block size must be >= 1");
  Index x;
  x.options_ = options;
  x.collection_ = std::make_unique<DocumentCollection>(std::move(collection));
  if (options.scorer.kind == ScoreKind::kStatic && options.scorer.static_weights.size() != x.collection_->doc_count()) {
    throw Error(ErrorCode::kInvalidArgument, "static weights must have one entry per document");
  }
  x.tree_ = std::make_unique<GSTree>(*x.collection_);
  const auto n = x.tree_->leaf_count();
  if (options.levels < 1 || options.levels > max_levels(n)) {
    throw Error(ErrorCode::kInvalidArgument, "levels must be in [1, " + std::to_string(max_levels(n)) + "]");
  }
  x.links_ = build_links(*x.tree_, *x.collection_, options.scorer);
  x.topk_ = std::make_unique<TopKIndex>(*x.tree_, x.links_, options.block_words, options.levels);
  if (options.ram) x.ram_ = std::make_unique<RamIndex>(*x.tree_, x.links_);
  return x;
}

std::string Index::serialize() const {
  std::vector<std::pair<std::uint32_t, std::string>> parts;
  parts.emplace_back(kCorpus, section([&](Writer& w) { collection_->save(w); }));
  parts.emplace_back(kScorer, section([&](Writer& w) { options_.scorer.save(w); }));
  parts.emplace_back(kTree, section([&](Writer& w) { tree_->save(w); }));
  parts.emplace_back(kLinks, section([&](Writer& w) { save_links(w, links_); }));
  parts.emplace_back(kTopK, section([&](Writer& w) { topk_->save(w); }));
  if (ram_) parts.emplace_back(kRam, section([&](Writer& w) { ram_->save(w); }));

  Writer head;
  for (char c : kContainerMagic) head.put(static_cast<std::uint8_t>(c));
  head.put(kContainerVersion);
  head.put<std::uint64_t>(tree_->leaf_count());
  head.put<std::uint32_t>(static_cast<std::uint32_t>(collection_->doc_count()));
  head.put<std::uint64_t>(options_.block_words);
  head.put<std::uint32_t>(options_.levels);
  head.put(static_cast<std::uint8_t>(options_.scorer.kind));
  head.put<std::uint32_t>(static_cast<std::uint32_t>(parts.size()));
  const std::uint64_t table_bytes = parts.size() * (4 + 8 + 8 + 4);
  std::uint64_t offset = head.data().size() + table_bytes;
  for (const auto& [id, body] : parts) {
    head.put(id);
    head.put<std::uint64_t>(offset);
    head.put<std::uint64_t>(body.size());
    head.put(checksum(body));
    offset += body.size();
  }
  std::string out = head.take();
  for (const auto& part : parts) out += part.second;
  return out;
}

Index Index::deserialize(std::string_view bytes) {
  Reader r(bytes);
  for (char c : kContainerMagic) {
    if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(c)) throw Error(ErrorCode::kCorrupt, "not a tkdr index");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kContainerVersion) {
    throw Error(ErrorCode::kVersionMismatch, "index format version " + std::to_string(version) + " is not supported");
  }
  Index x;
  const auto n = r.get<std::uint64_t>();
  const auto docs = r.get<std::uint32_t>();
  x.options_.block_words = r.get<std::uint64_t>();
  x.options_.levels = r.get<std::uint32_t>();
  const auto kind = r.get<std::uint8_t>();
  const auto count = r.get<std::uint32_t>();
  if (count > 16) throw Error(ErrorCode::kCorrupt, "section table");
  std::vector<std::pair<std::uint32_t, std::string_view>> parts;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto id = r.get<std::uint32_t>();
    const auto off = r.get<std::uint64_t>();
    const auto len = r.get<std::uint64_t>();
    const auto crc = r.get<std::uint32_t>();
    if (off > bytes.size() || len > bytes.size() - off) throw Error(ErrorCode::kCorrupt, "section out of bounds");
    auto body = bytes.substr(off, len);
    if (checksum(body) != crc) throw Error(ErrorCode::kCorrupt, "checksum mismatch in section " + std::to_string(id));
    parts.emplace_back(id, body);
  }
  auto find = [&](std::uint32_t id) -> std::optional<std::string_view> {
    for (const auto& [sid, body] : parts) {
      if (sid == id) return body;
    }
    return std::nullopt;
  };
  auto need = [&](std::uint32_t id) {
    auto s = find(id);
    if (!s) throw Error(ErrorCode::kCorrupt, "missing section " + std::to_string(id));
    return *s;
  };
  auto read = [&](std::uint32_t id, auto&& fn) {
    Reader sr(need(id));
    fn(sr);
    if (!sr.done()) throw Error(ErrorCode::kCorrupt, "trailing bytes in section " + std::to_string(id));
  };
  read(kCorpus, [&](Reader& sr) { x.collection_ = std::make_unique<DocumentCollection>(DocumentCollection::load(sr)); });
  read(kScorer, [&](Reader& sr) { x.options_.scorer = Scorer::load(sr); });
  read(kTree, [&](Reader& sr) { x.tree_ = std::make_unique<GSTree>(GSTree::load(sr)); });
  read(kLinks, [&](Reader& sr) { x.links_ = load_links(sr); });
  read(kTopK, [&](Reader& sr) { x.topk_ = std::make_unique<TopKIndex>(TopKIndex::load(sr)); });
  if (find(kRam)) {
    read(kRam, [&](Reader& sr) { x.ram_ = std::make_unique<RamIndex>(RamIndex::load(sr)); });
    x.options_.ram = true;
  }
  if (x.tree_->leaf_count() != n || x.collection_->doc_count() != docs ||
      static_cast<std::uint8_t>(x.options_.scorer.kind) != kind || x.topk_->block_words() != x.options_.block_words ||
      x.topk_->level_count() != x.options_.levels || x.topk_->base().node_count() != x.tree_->node_count()) {
    throw Error(ErrorCode::kCorrupt, "header disagrees with sections");
  }
  return x;
}

void Index::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Index Index::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

QueryOutcome Index::query(std::string_view pattern, std::uint64_t k, Engine engine) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (engine == Engine::kRam && !ram_) throw Error(ErrorCode::kInvalidArgument, "index was built without the ram engine");
  QueryOutcome q;
  q.tape = IoTape(options_.block_words);
  auto u = tree_->locus(pattern, &q.tape);
  if (!u) return q;
  q.matched = true;
  q.locus = *u;
  std::vector<Link> hits;
  if (engine == Engine::kEm) {
    auto r = topk_->query(*u, k, &q.tape);
    hits = std::move(r.hits);
    q.route = r.route;
    q.z = r.z;
  } else {
    auto r = ram_->query(*u, k);
    hits = std::move(r.hits);
    q.route = r.small_path ? 1 : 0;
    q.pops = r.pops;
    q.select_calls = r.select_calls;
  }
  for (const auto& l : hits) q.hits.push_back(Hit{l.doc, l.raw, l.score});
  return q;
}

std::string Index::build_stats_json() const {
  nlohmann::json j;
  j["n"] = tree_->leaf_count();
  j["docs"] = collection_->doc_count();
  j["nodes"] = tree_->node_count();
  j["links"] = links_.size();
  j["block"] = options_.block_words;
  j["levels"] = options_.levels;
  j["score"] = to_string(options_.scorer.kind);
  j["g"] = topk_->g();
  j["base_words"] = topk_->base_words();
  auto levels = nlohmann::json::array();
  for (unsigned b = 1; b <= topk_->level_count(); ++b) {
    const auto& lv = topk_->level(b);
    std::uint64_t cands = 0;
    for (const auto& t : lv.trees) cands += t.links().size();
    levels.push_back({{"level", b}, {"g", lv.g}, {"primes", lv.primes.size()}, {"candidates", cands},
                      {"words", topk_->level_words(b)}});
  }
  j["level_entries"] = levels;
  j["total_words"] = topk_->word_count();
  if (ram_) j["ram_words"] = ram_->word_count();
  return j.dump();
}

std::vector<std::int64_t> load_static_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::int64_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || line.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "bad weight on line " + std::to_string(lineno));
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace tkdr

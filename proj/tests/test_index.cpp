#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "doctest.h"
#include "tkdr/harness.hpp"

using namespace tkdr;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("tkdr_test_") + std::to_string(::getpid()) + name);
}

std::vector<std::pair<DocId, std::int64_t>> sorted_pairs(std::vector<Hit> hits) {
  std::vector<std::pair<DocId, std::int64_t>> v;
  for (const auto& h : hits) v.emplace_back(h.doc, h.raw);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace


TEST_CASE("banana example through the facade") {
  BuildOptions opt;
  opt.ram = true;
  opt.levels = 1;
  auto idx = Index::build(DocumentCollection({"banana", "ana"}), opt);
  auto em = idx.query("ana", 2);
  CHECK(em.matched);
  CHECK(sorted_pairs(em.hits) == std::vector<std::pair<DocId, std::int64_t>>{{1, 2}, {2, 1}});
  auto ram = idx.query("ana", 2, Engine::kRam);
  REQUIRE(ram.hits.size() == 2);
  CHECK(ram.hits[0].doc == 1);
  CHECK(ram.hits[1].doc == 2);
  auto none = idx.query("xyz", 3);
  CHECK_FALSE(none.matched);
  CHECK(none.hits.empty());
  CHECK_THROWS_AS(idx.query("ana", 0), Error);
}

TEST_CASE("build options are validated") {
  BuildOptions opt;
  opt.levels = 0;
  CHECK_THROWS_AS(Index::build(DocumentCollection({"ab"}), opt), Error);
  opt.levels = 2;
  opt.block_words = 0;
  CHECK_THROWS_AS(Index::build(DocumentCollection({"ab"}), opt), Error);
  opt.block_words = 4;
  opt.scorer.kind = ScoreKind::kStatic;
  opt.scorer.static_weights = {1};
  CHECK_THROWS_AS(Index::build(DocumentCollection({"ab", "cd"}), opt), Error);
  BuildOptions plain;
  auto idx = Index::build(DocumentCollection({"ab"}), BuildOptions{Scorer{}, 4, 1, false});
  CHECK_THROWS_AS(idx.query("a", 1, Engine::kRam), Error);
}

TEST_CASE("save and open round trip") {
  BuildOptions opt;
  opt.block_words = 8;
  opt.ram = true;
  opt.scorer.kind = ScoreKind::kMinDist;
  auto c = harness::random_collection(4, 20, 3000, 4);
  auto idx = Index::build(c, opt);
  auto path = temp_file("round.tkdr");
  idx.save(path);
  auto back = Index::open(path);
  std::filesystem::remove(path);
  CHECK(back.serialize() == idx.serialize());
  for (std::string p : {"a", "ab", "bca", "ddd", "abcdabcd"}) {
    for (std::uint64_t k : {1, 4, 100}) {
      auto x = idx.query(p, k), y = back.query(p, k);
      CHECK(sorted_pairs(x.hits) == sorted_pairs(y.hits));
      CHECK(x.tape.total() == y.tape.total());
      auto rx = idx.query(p, k, Engine::kRam), ry = back.query(p, k, Engine::kRam);
      CHECK(sorted_pairs(rx.hits) == sorted_pairs(ry.hits));
      CHECK(sorted_pairs(rx.hits) == sorted_pairs(x.hits));
    }
  }
}

TEST_CASE("rebuilding gives identical bytes") {
  BuildOptions opt;
  opt.scorer = harness::make_scorer(ScoreKind::kStatic, 15, 2);
  auto c = harness::random_collection(2, 15, 1500, 26);
  CHECK(Index::build(c, opt).serialize() == Index::build(c, opt).serialize());
}

TEST_CASE("damaged containers are rejected") {
  auto idx = Index::build(harness::random_collection(5, 5, 500, 2), BuildOptions{});
  const std::string bytes = idx.serialize();

  auto code_of = [](const std::string& b) {
    try {
      Index::deserialize(b);
    } catch (const Error& e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  std::string flipped = bytes;
  flipped[bytes.size() - 3] ^= 0x5a;
  CHECK(code_of(flipped) == static_cast<int>(ErrorCode::kCorrupt));
  CHECK(code_of(bytes.substr(0, bytes.size() / 2)) == static_cast<int>(ErrorCode::kCorrupt));
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK(code_of(magic) == static_cast<int>(ErrorCode::kCorrupt));
  std::string version = bytes;
  version[4] = 9;
  CHECK(code_of(version) == static_cast<int>(ErrorCode::kVersionMismatch));
  CHECK_THROWS_AS(Index::open("/nonexistent/dir/x.tkdr"), Error);
}

TEST_CASE("build stats") {
  auto idx = Index::build(harness::random_collection(6, 10, 1000, 4), BuildOptions{Scorer{}, 16, 2, true});
  auto s = nlohmann::json::parse(idx.build_stats_json());
  CHECK(s["n"] == 1000);
  CHECK(s["docs"] == 10);
  CHECK(s["levels"] == 2);
  CHECK(s["level_entries"].size() == 2);
  CHECK(s["ram_words"].get<std::uint64_t>() > 0);
}

TEST_CASE("static weights file") {
  auto path = temp_file("w.txt");
  {
    std::ofstream f(path);
    f << "3\n\n-1\n7\n";
  }
  CHECK(load_static_weights(path) == std::vector<std::int64_t>{3, -1, 7});
  {
    std::ofstream f(path);
    f << "3\nx\n";
  }
  CHECK_THROWS_AS(load_static_weights(path), Error);
  std::filesystem::remove(path);
}

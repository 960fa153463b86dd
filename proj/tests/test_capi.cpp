#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tkdr/tkdr.h"

namespace {

tkdr_index* toy(int ram) {
  const char* docs[] = {"banana", "ana"};
  size_t lens[] = {6, 3};
  tkdr_build_options o;
  tkdr_build_options_init(&o);
  o.block_words = 4;
  o.ram = ram;
  tkdr_index* idx = nullptr;
  REQUIRE(tkdr_build(docs, lens, 2, &o, &idx) == TKDR_OK);
  return idx;
}

std::filesystem::path scratch(const char* name) {
  return std::filesystem::temp_directory_path() / ("tkdr_capi_" + std::to_string(::getpid()) + name);
}

}  // namespace

TEST_CASE("query through the C interface") {
  tkdr_index* idx = toy(1);
  tkdr_hit hits[4];
  size_t n = 0;
  tkdr_query_stats st;
  REQUIRE(tkdr_query(idx, "ana", 3, 2, TKDR_ENGINE_RAM, hits, 4, &n, &st) == TKDR_OK);
  REQUIRE(n == 2);
  CHECK(hits[0].doc == 1);
  CHECK(hits[0].raw == 2);
  CHECK(hits[1].doc == 2);
  CHECK(st.matched == 1);
  CHECK(st.io_total == st.io_locus + st.io_equi + st.io_high + st.io_conversion + st.io_selection);

  REQUIRE(tkdr_query(idx, "ana", 3, 2, TKDR_ENGINE_EM, hits, 4, &n, nullptr) == TKDR_OK);
  CHECK(n == 2);
  REQUIRE(tkdr_query(idx, "zzz", 3, 2, TKDR_ENGINE_EM, hits, 4, &n, &st) == TKDR_OK);
  CHECK(n == 0);
  CHECK(st.matched == 0);
  CHECK(tkdr_query(idx, "ana", 3, 0, TKDR_ENGINE_EM, hits, 4, &n, nullptr) == TKDR_ERR_USAGE);
  CHECK(std::strlen(tkdr_last_error()) > 0);
  CHECK(tkdr_doc_count(idx) == 2);
  CHECK(tkdr_doc_name(idx, 3) == nullptr);
  tkdr_free(idx);
}

TEST_CASE("ram engine needs a ram build") {
  tkdr_index* idx = toy(0);
  tkdr_hit hits[4];
  size_t n = 0;
  CHECK(tkdr_query(idx, "ana", 3, 2, TKDR_ENGINE_RAM, hits, 4, &n, nullptr) == TKDR_ERR_INVALID);
  tkdr_free(idx);
}

TEST_CASE("save, open and corrupt") {
  tkdr_index* idx = toy(1);
  auto path = scratch("x.tkdr");
  REQUIRE(tkdr_save(idx, path.c_str()) == TKDR_OK);
  tkdr_index* back = nullptr;
  REQUIRE(tkdr_open(path.c_str(), &back) == TKDR_OK);
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(tkdr_build_stats(idx, &a) == TKDR_OK);
  REQUIRE(tkdr_build_stats(back, &b) == TKDR_OK);
  CHECK(std::string(a) == std::string(b));
  tkdr_string_free(a);
  tkdr_string_free(b);
  tkdr_free(back);

  std::string bytes;
  {
    std::ifstream f(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(f), {});
  }
  bytes[bytes.size() - 2] ^= 1;
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << bytes;
  }
  back = nullptr;
  CHECK(tkdr_open(path.c_str(), &back) == TKDR_ERR_CORRUPT);
  CHECK(back == nullptr);
  std::filesystem::remove(path);
  CHECK(tkdr_open(path.c_str(), &back) == TKDR_ERR_IO);
  tkdr_free(idx);
}

TEST_CASE("build from a directory and bad options") {
  auto dir = scratch("corpus");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a") << "banana";
  std::ofstream(dir / "b") << "ana";
  tkdr_build_options o;
  tkdr_build_options_init(&o);
  tkdr_index* idx = nullptr;
  REQUIRE(tkdr_build_file(dir.c_str(), &o, &idx) == TKDR_OK);
  CHECK(std::string(tkdr_doc_name(idx, 1)) == "a");
  tkdr_free(idx);
  o.levels = 0;
  CHECK(tkdr_build_file(dir.c_str(), &o, &idx) == TKDR_ERR_INVALID);
  o.levels = 1;
  o.score = TKDR_SCORE_STATIC;
  CHECK(tkdr_build_file(dir.c_str(), &o, &idx) == TKDR_ERR_INVALID);
  std::filesystem::remove_all(dir);
  CHECK(tkdr_build_file(dir.c_str(), &o, &idx) == TKDR_ERR_IO);
}

TEST_CASE("verify and bench") {
  char* report = nullptr;
  CHECK(tkdr_verify(R"({"max_n": 150, "seeds": 1, "scores": ["freq"]})", &report) == TKDR_OK);
  CHECK(std::string(report).find("\"pass\": true") != std::string::npos);
  tkdr_string_free(report);
  report = nullptr;
  CHECK(tkdr_verify(R"({"max_n": 150, "seeds": 1, "scores": ["freq"], "fault": true})", &report) == TKDR_ERR_VERIFY);
  tkdr_string_free(report);
  CHECK(tkdr_verify("{not json", &report) == TKDR_ERR_USAGE);
  CHECK(tkdr_verify(R"({"scores": ["bogus"]})", &report) == TKDR_ERR_INVALID);

  uint64_t sizes[] = {300};
  uint64_t blocks[] = {1, 8};
  char* csv = nullptr;
  REQUIRE(tkdr_bench(sizes, 1, blocks, 2, &csv) == TKDR_OK);
  std::string s(csv);
  tkdr_string_free(csv);
  CHECK(s.rfind("n,B,k,", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 2 * 3);
}

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tkdr/tkdr.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerify = 2;
constexpr int kExitCorrupt = 3;

int exit_code(tkdr_status s) {
  switch (s) {
    case TKDR_OK: return kExitOk;
    case TKDR_ERR_VERIFY: return kExitVerify;
    case TKDR_ERR_CORRUPT:
    case TKDR_ERR_VERSION: return kExitCorrupt;
    default: return kExitUsage;
  }
}

int fail(tkdr_status s) {
  std::cerr << "error: " << tkdr_last_error() << "\n";
  return exit_code(s);
}

int fail(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return kExitUsage;
}

bool read_weights(const std::string& path, std::vector<int64_t>& out, std::string& err) {
  std::ifstream f(path);
  if (!f) {
    err = "cannot read " + path;
    return false;
  }
  std::string line;
  for (int no = 1; std::getline(f, line); ++no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream in(line);
    int64_t v;
    std::string rest;
    if (!(in >> v) || (in >> rest)) {
      err = path + ":" + std::to_string(no) + ": not an integer";
      return false;
    }
    out.push_back(v);
  }
  return true;
}

struct BuildArgs {
  std::string corpus, out, score = "freq", weights;
  uint64_t block = 64;
  uint32_t levels = 2;
  bool ram = false;
};

int run_build(const BuildArgs& a) {
  tkdr_build_options o;
  tkdr_build_options_init(&o);
  std::vector<int64_t> w;
  if (a.score == "freq") {
    o.score = TKDR_SCORE_FREQ;
  } else if (a.score == "mindist") {
    o.score = TKDR_SCORE_MINDIST;
  } else {
    o.score = TKDR_SCORE_STATIC;
    if (a.weights.empty()) return fail("--score static needs --static-weights");
    std::string err;
    if (!read_weights(a.weights, w, err)) return fail(err);
    o.static_weights = w.data();
    o.static_weight_count = w.size();
  }
  o.block_words = a.block;
  o.levels = a.levels;
  o.ram = a.ram;
  tkdr_index* idx = nullptr;
  if (auto s = tkdr_build_file(a.corpus.c_str(), &o, &idx); s != TKDR_OK) return fail(s);
  int rc = kExitOk;
  char* stats = nullptr;
  if (auto s = tkdr_save(idx, a.out.c_str()); s != TKDR_OK) {
    rc = fail(s);
  } else if (auto s2 = tkdr_build_stats(idx, &stats); s2 != TKDR_OK) {
    rc = fail(s2);
  } else {
    std::cout << stats << "\n";
  }
  tkdr_string_free(stats);
  tkdr_free(idx);
  return rc;
}

struct QueryArgs {
  std::string index, pattern, engine = "em", batch;
  uint64_t k = 10;
  bool stats = false, pretty = false;
};

struct Answer {
  tkdr_status status = TKDR_OK;
  std::string error;
  std::vector<tkdr_hit> hits;
  tkdr_query_stats st{};
};

Answer answer(const tkdr_index* idx, const std::string& p, uint64_t k, tkdr_engine e) {
  Answer a;
  a.hits.resize(static_cast<size_t>(std::min<uint64_t>(k, tkdr_doc_count(idx))));
  size_t n = 0;
  a.status = tkdr_query(idx, p.data(), p.size(), k, e, a.hits.data(), a.hits.size(), &n, &a.st);
  if (a.status != TKDR_OK) a.error = tkdr_last_error();
  a.hits.resize(n);
  return a;
}

void print_answer(const tkdr_index* idx, const Answer& a, const QueryArgs& q, const std::string* pattern) {
  if (q.pretty) {
    if (pattern) std::cout << "pattern: " << *pattern << "\n";
    std::printf("%-6s %-24s %12s %12s\n", "doc", "name", "raw_score", "rank_score");
    for (const auto& h : a.hits) {
      std::printf("%-6u %-24s %12lld %12llu\n", h.doc, tkdr_doc_name(idx, h.doc), static_cast<long long>(h.raw),
                  static_cast<unsigned long long>(h.rank));
    }
    std::cout << (a.st.matched ? "ok" : "no match") << ", " << a.hits.size() << " result(s)";
    if (q.stats) std::cout << ", " << a.st.io_total << " block reads";
    std::cout << "\n";
    return;
  }
  for (const auto& h : a.hits) {
    json line = {{"doc", h.doc}, {"name", tkdr_doc_name(idx, h.doc)}, {"raw_score", h.raw}, {"rank_score", h.rank}};
    if (pattern) line["pattern"] = *pattern;
    std::cout << line.dump() << "\n";
  }
  json tail = {{"status", a.st.matched ? "ok" : "no match"}, {"count", a.hits.size()}};
  if (pattern) tail["pattern"] = *pattern;
  if (q.stats) {
    tail["io"] = {{"locus", a.st.io_locus},         {"equi", a.st.io_equi},
                  {"high", a.st.io_high},           {"conversion", a.st.io_conversion},
                  {"selection", a.st.io_selection}, {"total", a.st.io_total}};
  }
  std::cout << tail.dump() << "\n";
}

int run_query(const QueryArgs& q) {
  if (q.k < 1) return fail("-k must be >= 1");
  if (q.pattern.empty() == q.batch.empty()) return fail("give exactly one of --pattern and --batch");
  const tkdr_engine e = q.engine == "ram" ? TKDR_ENGINE_RAM : TKDR_ENGINE_EM;
  tkdr_index* idx = nullptr;
  if (auto s = tkdr_open(q.index.c_str(), &idx); s != TKDR_OK) return fail(s);

  int rc = kExitOk;
  if (!q.pattern.empty()) {
    auto a = answer(idx, q.pattern, q.k, e);
    if (a.status != TKDR_OK) {
      std::cerr << "error: " << a.error << "\n";
      rc = exit_code(a.status);
    } else {
      print_answer(idx, a, q, nullptr);
    }
    tkdr_free(idx);
    return rc;
  }

  std::ifstream f(q.batch);
  if (!f) {
    tkdr_free(idx);
    return fail("cannot read " + q.batch);
  }
  std::vector<std::string> patterns;
  for (std::string line; std::getline(f, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) patterns.push_back(line);
  }
  std::vector<Answer> answers(patterns.size());
  std::atomic<size_t> next{0};
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<size_t>(workers, std::max<size_t>(patterns.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (size_t i; (i = next++) < patterns.size();) answers[i] = answer(idx, patterns[i], q.k, e);
    });
  }
  for (auto& t : pool) t.join();
  for (size_t i = 0; i < patterns.size(); ++i) {
    if (answers[i].status != TKDR_OK) {
      std::cerr << "error: " << patterns[i] << ": " << answers[i].error << "\n";
      rc = exit_code(answers[i].status);
      continue;
    }
    print_answer(idx, answers[i], q, &patterns[i]);
  }
  tkdr_free(idx);
  return rc;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_verify(uint64_t max_n, uint64_t seeds, const std::string& scores) {
  json cfg = {{"max_n", max_n}, {"seeds", seeds}, {"scores", split_csv(scores)}};
  char* report = nullptr;
  const auto s = tkdr_verify(cfg.dump().c_str(), &report);
  if (!report) return fail(s);
  std::cout << report << "\n";
  tkdr_string_free(report);
  if (s == TKDR_ERR_VERIFY) std::cerr << "verification failed\n";
  return exit_code(s);
}

int run_bench(const std::vector<uint64_t>& sizes, const std::vector<uint64_t>& blocks) {
  char* csv = nullptr;
  if (auto s = tkdr_bench(sizes.data(), sizes.size(), blocks.data(), blocks.size(), &csv); s != TKDR_OK) {
    return fail(s);
  }
  std::cout << csv;
  tkdr_string_free(csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-k document retrieval index"};
  app.require_subcommand(1);

  BuildArgs b;
  auto* build = app.add_subcommand("build", "build an index container from a corpus");
  build->add_option("--corpus", b.corpus, "directory (one file per document) or NUL-separated file")->required();
  build->add_option("--out", b.out, "container path")->required();
  build->add_option("--score", b.score, "scoring")->check(CLI::IsMember({"freq", "mindist", "static"}))->capture_default_str();
  build->add_option("--static-weights", b.weights, "one integer per document, one per line");
  build->add_option("--block", b.block, "block size B in words")->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("--levels", b.levels, "bootstrapping levels h")->capture_default_str();
  build->add_flag("--ram", b.ram, "also build the RAM engine");

  QueryArgs q;
  auto* query = app.add_subcommand("query", "top-k documents for a pattern");
  query->add_option("--index", q.index, "container path")->required();
  query->add_option("--pattern", q.pattern, "pattern");
  query->add_option("--batch", q.batch, "file with one pattern per line, answered concurrently");
  query->add_option("-k", q.k, "number of documents")->capture_default_str();
  query->add_option("--engine", q.engine, "em or ram")->check(CLI::IsMember({"em", "ram"}))->capture_default_str();
  query->add_flag("--stats", q.stats, "append block-read counts per phase");
  query->add_flag("--pretty", q.pretty, "table instead of JSON lines");

  uint64_t max_n = 2000, seeds = 3;
  std::string scores = "freq,mindist,static";
  auto* verify = app.add_subcommand("verify", "randomized checks against brute-force oracles");
  verify->add_option("--max-n", max_n, "largest corpus length")->capture_default_str();
  verify->add_option("--seeds", seeds, "corpora per score kind")->capture_default_str();
  verify->add_option("--scores", scores, "comma-separated score kinds")->capture_default_str();

  std::vector<uint64_t> sizes{1000, 10000, 100000}, blocks{16, 64, 256};
  auto* bench = app.add_subcommand("bench", "block reads and wall time per query phase, as CSV");
  bench->add_option("--sizes", sizes, "corpus lengths")->delimiter(',')->capture_default_str();
  bench->add_option("--block", blocks, "block sizes")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (build->parsed()) return run_build(b);
  if (query->parsed()) return run_query(q);
  if (verify->parsed()) return run_verify(max_n, seeds, scores);
  return run_bench(sizes, blocks);
}

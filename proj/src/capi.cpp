#include "tkdr/tkdr.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "tkdr/harness.hpp"
#include "tkdr/index.hpp"

struct tkdr_index {
  tkdr::Index index;
};

namespace {

thread_local std::string g_last_error;

tkdr_status status_of(tkdr::ErrorCode c) {
  switch (c) {
    case tkdr::ErrorCode::kCorrupt: return TKDR_ERR_CORRUPT;
    case tkdr::ErrorCode::kVersionMismatch: return TKDR_ERR_VERSION;
    case tkdr::ErrorCode::kIo: return TKDR_ERR_IO;
    default: return TKDR_ERR_INVALID;
  }
}

template <class F>
tkdr_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const tkdr::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return TKDR_ERR_USAGE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TKDR_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TKDR_ERR_INVALID;
  }
}

tkdr_status usage(const char* msg) {
  g_last_error = msg;
  return TKDR_ERR_USAGE;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

tkdr::BuildOptions convert(const tkdr_build_options* o) {
  tkdr::BuildOptions b;
  b.scorer.kind = static_cast<tkdr::ScoreKind>(o->score);
  if (o->score == TKDR_SCORE_STATIC) {
    if (!o->static_weights) throw tkdr::Error(tkdr::ErrorCode::kInvalidArgument, "static scoring needs weights");
    b.scorer.static_weights.assign(o->static_weights, o->static_weights + o->static_weight_count);
  } else if (o->score != TKDR_SCORE_FREQ && o->score != TKDR_SCORE_MINDIST) {
    throw tkdr::Error(tkdr::ErrorCode::kInvalidArgument, "unknown score kind");
  }
  b.block_words = o->block_words;
  b.levels = o->levels;
  b.ram = o->ram != 0;
  return b;
}

}  // namespace

extern "C" {

void tkdr_build_options_init(tkdr_build_options* opts) {
  if (!opts) return;
  opts->score = TKDR_SCORE_FREQ;
  opts->static_weights = nullptr;
  opts->static_weight_count = 0;
  opts->block_words = 64;
  opts->levels = 2;
  opts->ram = 0;
}

tkdr_status tkdr_build_file(const char* corpus_path, const tkdr_build_options* opts, tkdr_index** out) {
  if (!corpus_path || !opts || !out) return usage("null argument");
  return guarded([&] {
    auto c = tkdr::load_collection(corpus_path);
    auto b = convert(opts);
    *out = new tkdr_index{tkdr::Index::build(std::move(c), b)};
    return TKDR_OK;
  });
}

tkdr_status tkdr_build(const char* const* docs, const size_t* lengths, size_t count, const tkdr_build_options* opts,
                       tkdr_index** out) {
  if (!docs || !lengths || !opts || !out) return usage("null argument");
  return guarded([&] {
    std::vector<std::string> v;
    for (size_t i = 0; i < count; ++i) v.emplace_back(docs[i], lengths[i]);
    auto b = convert(opts);
    *out = new tkdr_index{tkdr::Index::build(tkdr::DocumentCollection(std::move(v)), b)};
    return TKDR_OK;
  });
}

tkdr_status tkdr_open(const char* path, tkdr_index** out) {
  if (!path || !out) return usage("null argument");
  return guarded([&] {
    *out = new tkdr_index{tkdr::Index::open(path)};
    return TKDR_OK;
  });
}

tkdr_status tkdr_save(const tkdr_index* index, const char* path) {
  if (!index || !path) return usage("null argument");
  return guarded([&] {
    index->index.save(path);
    return TKDR_OK;
  });
}

void tkdr_free(tkdr_index* index) { delete index; }

uint64_t tkdr_doc_count(const tkdr_index* index) { return index ? index->index.collection().doc_count() : 0; }

const char* tkdr_doc_name(const tkdr_index* index, uint32_t doc) {
  if (!index || doc < 1 || doc > index->index.collection().doc_count()) return nullptr;
  return index->index.collection().name(doc).c_str();
}

tkdr_status tkdr_query(const tkdr_index* index, const char* pattern, size_t pattern_len, uint64_t k, tkdr_engine engine,
                       tkdr_hit* hits, size_t capacity, size_t* count, tkdr_query_stats* stats) {
  if (!index || !pattern || !count || (capacity && !hits)) return usage("null argument");
  if (k < 1) return usage("k must be >= 1");
  if (engine != TKDR_ENGINE_EM && engine != TKDR_ENGINE_RAM) return usage("unknown engine");
  return guarded([&] {
    auto q = index->index.query(std::string_view(pattern, pattern_len), k,
                                engine == TKDR_ENGINE_RAM ? tkdr::Engine::kRam : tkdr::Engine::kEm);
    const size_t n = std::min(capacity, q.hits.size());
    for (size_t i = 0; i < n; ++i) hits[i] = tkdr_hit{q.hits[i].doc, q.hits[i].raw, q.hits[i].rank};
    *count = n;
    if (stats) {
      using tkdr::Phase;
      stats->matched = q.matched;
      stats->io_locus = q.tape.phase(Phase::kLocus);
      stats->io_equi = q.tape.phase(Phase::kEqui);
      stats->io_high = q.tape.phase(Phase::kHigh);
      stats->io_conversion = q.tape.phase(Phase::kConversion);
      stats->io_selection = q.tape.phase(Phase::kSelection);
      stats->io_total = q.tape.total();
      stats->z = q.z;
      stats->route = q.route;
    }
    return TKDR_OK;
  });
}

tkdr_status tkdr_build_stats(const tkdr_index* index, char** json_out) {
  if (!index || !json_out) return usage("null argument");
  return guarded([&] {
    *json_out = dup(index->index.build_stats_json());
    return TKDR_OK;
  });
}

tkdr_status tkdr_verify(const char* config_json, char** report_out) {
  if (!report_out) return usage("null argument");
  return guarded([&] {
    tkdr::harness::VerifyConfig cfg;
    if (config_json && *config_json) {
      auto j = nlohmann::json::parse(config_json);
      if (j.contains("max_n")) cfg.max_n = j["max_n"].get<std::uint64_t>();
      if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::size_t>();
      if (j.contains("fault")) cfg.fault = j["fault"].get<bool>();
      if (j.contains("scores")) {
        cfg.kinds.clear();
        for (const auto& s : j["scores"]) cfg.kinds.push_back(tkdr::parse_score_kind(s.get<std::string>()));
      }
    }
    auto report = tkdr::harness::verify_sweep(cfg);
    *report_out = dup(report.dump(2));
    return report["pass"].get<bool>() ? TKDR_OK : TKDR_ERR_VERIFY;
  });
}

tkdr_status tkdr_bench(const uint64_t* sizes, size_t size_count, const uint64_t* blocks, size_t block_count,
                       char** csv_out) {
  if (!sizes || !blocks || !csv_out || !size_count || !block_count) return usage("empty sizes or blocks");
  return guarded([&] {
    for (size_t i = 0; i < size_count; ++i) {
      if (sizes[i] < 8) throw tkdr::Error(tkdr::ErrorCode::kInvalidArgument, "bench size must be >= 8");
    }
    for (size_t i = 0; i < block_count; ++i) {
      if (blocks[i] < 1) throw tkdr::Error(tkdr::ErrorCode::kInvalidArgument, "block must be >= 1");
    }
    *csv_out = dup(tkdr::harness::bench({sizes, sizes + size_count}, {blocks, blocks + block_count}, 7));
    return TKDR_OK;
  });
}

void tkdr_string_free(char* s) { std::free(s); }

const char* tkdr_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"

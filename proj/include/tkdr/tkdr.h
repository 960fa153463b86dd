/* C interface to the top-k document retrieval index. */
#ifndef TKDR_H
#define TKDR_H

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define TKDR_API __attribute__((visibility("default")))
#else
#define TKDR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  TKDR_OK = 0,
  TKDR_ERR_USAGE = 1,
  TKDR_ERR_VERIFY = 2,
  TKDR_ERR_CORRUPT = 3,
  TKDR_ERR_IO = 4,
  TKDR_ERR_INVALID = 5,
  TKDR_ERR_VERSION = 6
} tkdr_status;

typedef enum { TKDR_SCORE_FREQ = 0, TKDR_SCORE_MINDIST = 1, TKDR_SCORE_STATIC = 2 } tkdr_score_kind;
typedef enum { TKDR_ENGINE_EM = 0, TKDR_ENGINE_RAM = 1 } tkdr_engine;

typedef struct tkdr_index tkdr_index;

typedef struct {
  tkdr_score_kind score;
  const int64_t* static_weights; /* one per document, static scoring only */
  size_t static_weight_count;
  uint64_t block_words;
  uint32_t levels;
  int ram;
} tkdr_build_options;

typedef struct {
  uint32_t doc;
  int64_t raw;
  uint64_t rank;
} tkdr_hit;

typedef struct {
  int matched;
  uint64_t io_locus, io_equi, io_high, io_conversion, io_selection, io_total;
  uint64_t z;
  int route;
} tkdr_query_stats;

TKDR_API void tkdr_build_options_init(tkdr_build_options* opts);

/* corpus_path: a directory (one document per file, by filename) or a file of
   NUL-separated documents. */
TKDR_API tkdr_status tkdr_build_file(const char* corpus_path, const tkdr_build_options* opts, tkdr_index** out);
TKDR_API tkdr_status tkdr_build(const char* const* docs, const size_t* lengths, size_t count,
                       const tkdr_build_options* opts, tkdr_index** out);
TKDR_API tkdr_status tkdr_open(const char* path, tkdr_index** out);
TKDR_API tkdr_status tkdr_save(const tkdr_index* index, const char* path);
TKDR_API void tkdr_free(tkdr_index* index);

TKDR_API uint64_t tkdr_doc_count(const tkdr_index* index);
/* Borrowed pointer valid for the index lifetime; documents are 1-based. */
TKDR_API const char* tkdr_doc_name(const tkdr_index* index, uint32_t doc);

/* Fills up to `capacity` hits; *count gets the number written. em: any order,
   ram: score descending. stats may be NULL. Safe to call concurrently. */
TKDR_API tkdr_status tkdr_query(const tkdr_index* index, const char* pattern, size_t pattern_len, uint64_t k,
                       tkdr_engine engine, tkdr_hit* hits, size_t capacity, size_t* count,
                       tkdr_query_stats* stats);

/* Strings returned through char** are owned by the caller: tkdr_string_free. */
TKDR_API tkdr_status tkdr_build_stats(const tkdr_index* index, char** json_out);
/* Config JSON: {"max_n", "seeds", "scores": ["freq", ...]}. Returns
   TKDR_ERR_VERIFY when any check fails; the report is written either way. */
TKDR_API tkdr_status tkdr_verify(const char* config_json, char** report_out);
TKDR_API tkdr_status tkdr_bench(const uint64_t* sizes, size_t size_count, const uint64_t* blocks, size_t block_count,
                       char** csv_out);
TKDR_API void tkdr_string_free(char* s);

/* Message for the last failure on this thread. */
TKDR_API const char* tkdr_last_error(void);

#ifdef __cplusplus
}
#endif

#endif

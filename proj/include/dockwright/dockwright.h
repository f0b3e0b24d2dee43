/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The Dockwright Authors */

/*
 * C interface to libdockwright. Handles are opaque; every fallible call
 * returns a dw_status and, on failure, leaves a message retrievable with
 * dw_last_error() on the calling thread. Strings returned through char**
 * are heap-allocated and must be released with dw_string_free().
 */

#ifndef DOCKWRIGHT_H_
#define DOCKWRIGHT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DW_BUILDING_LIBRARY)
#define DW_API __attribute__((visibility("default")))
#else
#define DW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dw_status {
  DW_OK = 0,
  DW_ERR_VALIDATION = 1,
  DW_ERR_IO = 2,
  DW_ERR_CONFIG = 3,
  DW_ERR_TRANSPORT = 4,
  DW_ERR_PROTOCOL = 5,
  DW_ERR_APPLICATION = 6,
  DW_ERR_INVALID_ARGUMENT = 7,
  DW_ERR_NOT_FOUND = 8,
  DW_ERR_INTERNAL = 9
} dw_status;

typedef struct dw_config dw_config;
typedef struct dw_corpus dw_corpus;
typedef struct dw_rules dw_rules;
typedef struct dw_clustering dw_clustering;
typedef struct dw_workbench dw_workbench;

DW_API const char* dw_version(void);
DW_API const char* dw_status_name(dw_status status);
/* Message for the last failed call on this thread ("" if none). */
DW_API const char* dw_last_error(void);
DW_API void dw_string_free(char* s);

/* ---- config ------------------------------------------------------------ */

/* path may be NULL for defaults. Environment overrides are applied. */
DW_API dw_status dw_config_load(const char* path, dw_config** out);
/* Keys: corpus, rules, clusters, host, port, search_url, embedder_url,
 * grid, tail_lines, timeout_s, engine, parallelism, clone_root. */
DW_API dw_status dw_config_set(dw_config* cfg, const char* key, const char* value);
DW_API void dw_config_free(dw_config* cfg);

/* ---- corpus ------------------------------------------------------------ */

DW_API dw_status dw_corpus_open(const char* path, dw_corpus** out);
DW_API dw_status dw_corpus_from_text(const char* text, size_t len, dw_corpus** out);
DW_API void dw_corpus_free(dw_corpus* corpus);
DW_API size_t dw_corpus_size(const dw_corpus* corpus);
/* [{"line": n, "reason": "..."}] */
DW_API dw_status dw_corpus_rejects_json(const dw_corpus* corpus, char** out);
/* {"total","successes","failures","timeouts","undetermined","breakage_rate"} */
DW_API dw_status dw_corpus_stats_json(const dw_corpus* corpus, char** out);
/* One record in corpus wire format. DW_ERR_NOT_FOUND for unknown ids. */
DW_API dw_status dw_corpus_record_json(const dw_corpus* corpus, const char* record_id,
                                       char** out);
DW_API dw_status dw_corpus_save(const dw_corpus* corpus, const char* path);

/* ---- rules ------------------------------------------------------------- */

DW_API dw_status dw_rules_builtin(dw_rules** out);
DW_API dw_status dw_rules_load(const char* path, dw_rules** out);
DW_API dw_status dw_rules_from_json(const char* text, dw_rules** out);
/* Writes with version + 1 and updates the handle's version. */
DW_API dw_status dw_rules_save(dw_rules* rules, const char* path, uint64_t* new_version);
DW_API dw_status dw_rules_to_json(const dw_rules* rules, char** out);
DW_API uint64_t dw_rules_version(const dw_rules* rules);
DW_API void dw_rules_free(dw_rules* rules);

/* ---- repair ------------------------------------------------------------ */

/* Repair outcome JSON for a corpus record. When cfg carries a search URL the
 * fallback queries it. Non-failure records give DW_ERR_VALIDATION. */
DW_API dw_status dw_repair_record(const dw_corpus* corpus, const char* record_id,
                                  const dw_rules* rules, const dw_config* cfg, char** out);
/* Same for a Dockerfile text and a raw log; never searches. */
DW_API dw_status dw_diagnose(const char* dockerfile, const char* log, const dw_rules* rules,
                             char** out);
/* {"tag": "identical_repair"|"suggestion_match"|"no_match", "detail": "..."} */
DW_API dw_status dw_time_travel(const char* broken, const char* log, const char* developer,
                                const dw_rules* rules, char** out);
DW_API dw_status dw_unified_diff(const char* before, const char* after, const char* before_label,
                                 const char* after_label, char** out);

/* ---- search ------------------------------------------------------------ */

/* {"record_id","keywords","query","results":[{"url","title","source_domain"}]} */
DW_API dw_status dw_search_record(const dw_corpus* corpus, const char* record_id,
                                  const dw_config* cfg, char** out);

/* ---- clustering -------------------------------------------------------- */

DW_API dw_status dw_cluster_corpus(const dw_corpus* corpus, const dw_config* cfg,
                                   dw_clustering** out);
DW_API dw_status dw_clustering_load(const char* path, dw_clustering** out);
DW_API dw_status dw_clustering_save(const dw_clustering* clustering, const char* path);
DW_API dw_status dw_clustering_to_json(const dw_clustering* clustering, char** out);
DW_API void dw_clustering_free(dw_clustering* clustering);

/* ---- reports ----------------------------------------------------------- */

/* what: "coverage" | "proportions" | "breakage"; format: "text" | "csv" |
 * "json". clustering may be NULL for "breakage". */
DW_API dw_status dw_report(const dw_corpus* corpus, const dw_clustering* clustering,
                           const dw_rules* rules, const char* what, const char* format,
                           char** out);

/* ---- builds ------------------------------------------------------------ */

/* jobs_jsonl: one {"repo", "dockerfile_path", "context_dir", "timeout_s",
 * "id"} object per line. Records are appended to out_corpus as they finish.
 * out receives the corpus statistics of the batch. */
DW_API dw_status dw_build_batch(const char* jobs_jsonl, const dw_config* cfg,
                                const char* out_corpus, char** out);

/* ---- workbench --------------------------------------------------------- */

/* Starts the HTTP service in the background. port 0 picks a free port. */
DW_API dw_status dw_workbench_start(const dw_config* cfg, uint16_t port, dw_workbench** out,
                                    uint16_t* bound_port);
/* Blocks serving on the configured host and port. */
DW_API dw_status dw_workbench_serve(const dw_config* cfg);
DW_API void dw_workbench_stop(dw_workbench* wb);

#ifdef __cplusplus
}
#endif

#endif /* DOCKWRIGHT_H_ */

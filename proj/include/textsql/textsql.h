#ifndef TEXTSQL_TEXTSQL_H
#define TEXTSQL_TEXTSQL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define TEXTSQL_API __attribute__((visibility("default")))
#else
#define TEXTSQL_API
#endif

typedef enum textsql_status {
    TEXTSQL_OK = 0,
    TEXTSQL_E_INVALID_ARGUMENT = 1,
    TEXTSQL_E_PARSE = 2,
    TEXTSQL_E_INTEGRITY = 3,
    TEXTSQL_E_SYNTAX = 4,
    TEXTSQL_E_RESOLUTION = 5,
    TEXTSQL_E_EMPTY_QUESTION = 6,
    TEXTSQL_E_UNKNOWN_ENTITY = 7,
    TEXTSQL_E_UNKNOWN_DB_ID = 8,
    TEXTSQL_E_DB_UNAVAILABLE = 9,
    TEXTSQL_E_GOLD_PARSE = 10,
    TEXTSQL_E_ALIGNMENT = 11,
    TEXTSQL_E_NOT_A_FAILURE = 12,
    TEXTSQL_E_CONFIG_AFTER_FEED = 13,
    TEXTSQL_E_CONFIG = 14,
    TEXTSQL_E_IO = 15,
    TEXTSQL_E_INTERNAL = 16
} textsql_status;

typedef enum textsql_verdict {
    TEXTSQL_ACCEPT = 0,
    TEXTSQL_REJECT = 1,
    TEXTSQL_COMPLETE = 2
} textsql_verdict;

typedef struct textsql_context textsql_context;
typedef struct textsql_checker textsql_checker;
typedef struct textsql_report textsql_report;
typedef struct textsql_triage_report textsql_triage_report;

/* Message of the last failed call on this thread; "" when none. */
TEXTSQL_API const char* textsql_last_error(void);
TEXTSQL_API const char* textsql_status_name(textsql_status status);
/* "accept", "reject", "complete". */
TEXTSQL_API const char* textsql_verdict_name(textsql_verdict verdict);
/* Frees strings returned through char** out-parameters. */
TEXTSQL_API void textsql_string_free(char* text);

/* Catalogs from a Spider tables.json file or its contents. The context is
   read-only once configured and may be shared between threads. */
TEXTSQL_API textsql_status textsql_context_open(const char* tables_path, textsql_context** out);
TEXTSQL_API textsql_status textsql_context_from_json(const char* tables_json, textsql_context** out);
TEXTSQL_API void textsql_context_free(textsql_context* ctx);
TEXTSQL_API textsql_status textsql_context_load_descriptions(textsql_context* ctx, const char* path);
/* Databases resolve to <db_root>/<db_id>/<db_id>.sqlite. */
TEXTSQL_API textsql_status textsql_context_set_db_root(textsql_context* ctx, const char* db_root);
TEXTSQL_API textsql_status textsql_context_db_count(const textsql_context* ctx, size_t* out);

typedef struct textsql_serialize_options {
    const char* scheme;              /* "baseline" (NULL), "fk" or "sd" */
    int with_anchors;                /* needs a db root */
    double anchor_threshold;         /* <= 0 keeps the default 0.85 */
    size_t anchor_max_per_column;    /* 0 keeps the default 2 */
} textsql_serialize_options;

/* options may be NULL. */
TEXTSQL_API textsql_status textsql_serialize(const textsql_context* ctx, const char* db_id, const char* question,
                                             const textsql_serialize_options* options, char** out_text);
/* {"text": ..., "segments": [{"kind", "begin", "end", ...}]} */
TEXTSQL_API textsql_status textsql_serialize_json(const textsql_context* ctx, const char* db_id,
                                                  const char* question, const textsql_serialize_options* options,
                                                  char** out_json);
/* One line per example of a Spider example file. format "text" or "json". */
TEXTSQL_API textsql_status textsql_serialize_examples(const textsql_context* ctx, const char* examples_path,
                                                      const textsql_serialize_options* options, const char* format,
                                                      char** out_lines);

TEXTSQL_API textsql_status textsql_checker_new(const textsql_context* ctx, const char* db_id, textsql_checker** out);
/* "lexical", "grammatical" or "schema" (default); only before the first feed. */
TEXTSQL_API textsql_status textsql_checker_set_level(textsql_checker* checker, const char* level);
TEXTSQL_API textsql_status textsql_checker_feed(textsql_checker* checker, const char* fragment, size_t length,
                                                textsql_verdict* out);
TEXTSQL_API textsql_status textsql_checker_fork(const textsql_checker* checker, textsql_checker** out);
/* -1 while the checker has not rejected. */
TEXTSQL_API textsql_status textsql_checker_reject_offset(const textsql_checker* checker, long long* out);
TEXTSQL_API void textsql_checker_free(textsql_checker* checker);

/* Feeds one byte at a time; reject_offset may be NULL. */
TEXTSQL_API textsql_status textsql_check_sql(const textsql_context* ctx, const char* db_id, const char* sql,
                                             const char* level, textsql_verdict* out, long long* reject_offset);

/* mode "official" (NULL) or "strict". */
TEXTSQL_API textsql_status textsql_exact_match(const textsql_context* ctx, const char* db_id, const char* gold,
                                               const char* pred, const char* mode, int* out_em);
/* {"em": 0|1, "mode": ..., "per_clause": {...}} */
TEXTSQL_API textsql_status textsql_exact_match_json(const textsql_context* ctx, const char* db_id, const char* gold,
                                                    const char* pred, const char* mode, char** out_json);
TEXTSQL_API textsql_status textsql_execution_match(const textsql_context* ctx, const char* db_id, const char* gold,
                                                   const char* pred, long long timeout_ms, int* out_ex);

typedef struct textsql_eval_options {
    const char* mode;        /* NULL: official */
    unsigned workers;        /* 0: hardware concurrency */
    long long timeout_ms;    /* <= 0: 30000 */
} textsql_eval_options;

TEXTSQL_API textsql_status textsql_evaluate(const textsql_context* ctx, const char* examples_path,
                                            const char* predictions_path, const textsql_eval_options* options,
                                            textsql_report** out);
TEXTSQL_API textsql_status textsql_report_metrics(const textsql_report* report, size_t* count, double* em_percent,
                                                  double* ex_percent);
/* format "json", "table" or "records" (JSON lines). */
TEXTSQL_API textsql_status textsql_report_render(const textsql_report* report, const char* format, char** out);
TEXTSQL_API void textsql_report_free(textsql_report* report);

/* Category identifier such as "DkAggregation" plus evidence text. */
TEXTSQL_API textsql_status textsql_classify(const textsql_context* ctx, const char* db_id, const char* gold,
                                            const char* pred, int em, int ex, char** out_category,
                                            char** out_evidence);
/* records_text: evaluator report JSON, a JSON array of records, or JSON lines. */
TEXTSQL_API textsql_status textsql_triage(const textsql_context* ctx, const char* records_text,
                                          textsql_triage_report** out);
TEXTSQL_API textsql_status textsql_triage_total(const textsql_triage_report* report, size_t* out);
/* format "json", "table" or "evidence" (JSON lines). */
TEXTSQL_API textsql_status textsql_triage_render(const textsql_triage_report* report, const char* format, char** out);
TEXTSQL_API void textsql_triage_free(textsql_triage_report* report);

#ifdef __cplusplus
}
#endif

#endif

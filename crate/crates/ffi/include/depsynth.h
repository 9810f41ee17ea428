#ifndef DEPSYNTH_H
#define DEPSYNTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_UTF8 = 2,
  DS_STATUS_INVALID_ARGUMENT = 3,
  DS_STATUS_CONFIG = 4,
  DS_STATUS_TABLE = 5,
  DS_STATUS_SELECTION = 6,
  DS_STATUS_GRAPH = 7,
  DS_STATUS_SYNTHESIS = 8,
  DS_STATUS_LIMIT = 9,
  DS_STATUS_IO = 10,
  DS_STATUS_INTERNAL = 11,
} DsStatus;

typedef enum {
  DS_CLASS_FD = 0,
  DS_CLASS_LD = 1,
  DS_CLASS_INDEPENDENT = 2,
  DS_CLASS_DEGENERATE = 3,
} DsClass;

/**
 * Parsed benchmark configuration.
 */
typedef struct DsConfig DsConfig;

/**
 * In-memory table.
 */
typedef struct DsTable DsTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ds_last_error_message(void);

/**
 * Stable machine-readable code of the last failure on this thread, or NULL.
 */
const char *ds_last_error_code(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void ds_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
DsStatus ds_config_parse(const char *json, DsConfig **out);

/**
 * Shipped configuration for benchmark case 1 to 4.
 *
 * # Safety
 * `out` must be writable.
 */
DsStatus ds_builtin_case(uint32_t case_number, DsConfig **out);

/**
 * Row count declared by the configuration, or 0 for NULL.
 *
 * # Safety
 * `config` must be NULL or a live handle.
 */
size_t ds_config_rows(const DsConfig *config);

/**
 * # Safety
 * `config` must be NULL or a handle not yet freed.
 */
void ds_config_free(DsConfig *config);

/**
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
DsStatus ds_generate_benchmark(const DsConfig *config, size_t rows, uint64_t seed, DsTable **out);

/**
 * Parses CSV bytes (header row first) with inferred column kinds.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be writable.
 */
DsStatus ds_table_read_csv(const uint8_t *data, size_t len, DsTable **out);

/**
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
DsStatus ds_table_write_csv(const DsTable *table, char **out);

/**
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t ds_table_rows(const DsTable *table);

/**
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t ds_table_cols(const DsTable *table);

/**
 * # Safety
 * `table` must be NULL or a handle not yet freed.
 */
void ds_table_free(DsTable *table);

/**
 * Minimal FDs as JSON.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
DsStatus ds_mine_fds_json(const DsTable *table, size_t max_lhs, char **out);

/**
 * Q report over all disjoint selection pairs up to `max_subset` columns.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
DsStatus ds_score_all_json(const DsTable *table, size_t max_subset, char **out);

/**
 * Q score of column `a` against column `b` as an exact fraction.
 *
 * # Safety
 * `table` must be a live handle, `a` and `b` NUL-terminated strings, and
 * every out-pointer writable.
 */
DsStatus ds_q_score(const DsTable *table,
                    const char *a,
                    const char *b,
                    uint64_t *numerator,
                    uint64_t *denominator,
                    DsClass *class_);

/**
 * HFGF synthesis driven by `config`'s dependencies.
 *
 * # Safety
 * Handles must be live, `generator` NUL-terminated, `out` writable.
 */
DsStatus ds_synthesize_hfgf(const DsTable *reference,
                            const DsConfig *config,
                            const char *generator,
                            size_t rows,
                            uint64_t seed,
                            DsTable **out);

/**
 * Every column drawn independently by the generator.
 *
 * # Safety
 * `reference` must be live, `generator` NUL-terminated, `out` writable.
 */
DsStatus ds_synthesize_baseline(const DsTable *reference,
                                const char *generator,
                                size_t rows,
                                uint64_t seed,
                                DsTable **out);

/**
 * Preservation report of `synth` against `real` as JSON.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
DsStatus ds_evaluate_json(const DsTable *real, const DsTable *synth, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEPSYNTH_H */

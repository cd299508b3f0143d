#ifndef CONTRAGAP_H
#define CONTRAGAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_UTF8 = 2,
  CG_STATUS_IO = 3,
  CG_STATUS_PARSE = 4,
  CG_STATUS_INVALID_INPUT = 5,
  CG_STATUS_INVALID_PARTITION = 6,
  CG_STATUS_CONFIG = 7,
  CG_STATUS_SOLVER = 8,
  CG_STATUS_INVARIANT = 9,
  CG_STATUS_PANIC = 10,
} CgStatus;

// Opaque handle to a capacitated graph with terminals.
typedef struct CgInstance CgInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds the hard instance for `(n, d, epsilon, seed)` with formula defaults for k and m.
//
// # Safety
// `out` must be valid for a pointer write.
enum CgStatus cg_generate(size_t n,
                          size_t d,
                          double epsilon,
                          uint64_t seed,
                          struct CgInstance **out);

// # Safety
// `path` must be a NUL-terminated string; `out` valid for a pointer write.
enum CgStatus cg_load(const char *path, struct CgInstance **out);

// # Safety
// `inst` must come from this library; `path` must be a NUL-terminated string.
enum CgStatus cg_save(const struct CgInstance *inst, const char *path);

// Instance sizes. Any output pointer may be null.
//
// # Safety
// `inst` must come from this library; non-null outputs must be writable.
enum CgStatus cg_counts(const struct CgInstance *inst, size_t *n, size_t *edges, size_t *terminals);

// Total edge capacity, saturating at `u64::MAX`.
//
// # Safety
// `inst` must come from this library; `out` must be writable.
enum CgStatus cg_total_capacity(const struct CgInstance *inst, uint64_t *out);

// Certifies the partition in `partition_path` for `m` pairs with cluster
// parameters from their formulas at `epsilon`. Writes the certificate JSON
// to `*json_out`; `*full_out` is 1 for a full run and 0 for a partial one.
//
// # Safety
// `inst` must come from this library, `partition_path` a NUL-terminated
// string, outputs writable.
enum CgStatus cg_certify(const struct CgInstance *inst,
                         const char *partition_path,
                         size_t m,
                         double epsilon,
                         bool lp_oracle,
                         char **json_out,
                         int32_t *full_out);

// Runs the pipeline for a config file into `out_dir`. `*exit_out` gets the
// CLI exit code: 0 full, 2 partial.
//
// # Safety
// Both paths must be NUL-terminated strings; `exit_out` writable.
enum CgStatus cg_run_pipeline(const char *config_path, const char *out_dir, int32_t *exit_out);

// Message of the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *cg_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void cg_string_free(char *s);

// # Safety
// `inst` must be null or an instance returned by this library, not yet freed.
void cg_instance_free(struct CgInstance *inst);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTRAGAP_H */

#ifndef ORDERDUAL_H
#define ORDERDUAL_H

/* Generated by cbindgen from the orderdual-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum OdStatus {
  OD_STATUS_OK = 0,
  // The call completed and at least one duality check failed.
  OD_STATUS_CHECK_FAILED = 1,
  OD_STATUS_NULL_POINTER = 2,
  OD_STATUS_INVALID_UTF8 = 3,
  OD_STATUS_PARSE = 4,
  OD_STATUS_INVALID_MODEL = 5,
  // A map or model lacks the structure the operation needs.
  OD_STATUS_UNSUPPORTED = 6,
  // A numeric or enumeration limit was reached.
  OD_STATUS_LIMIT = 7,
  OD_STATUS_IO = 8,
  OD_STATUS_PANIC = 9,
} OdStatus;

// A built model. Created by `od_model_builtin` or `od_model_from_json`.
typedef struct OdModel OdModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a builtin model from `name[:N]`, e.g. `"voter:3"`.
//
// # Safety
// `name` is a NUL-terminated string and `out` is writable.
enum OdStatus od_model_builtin(const char *name, struct OdModel **out);

// Builds a model from its JSON description.
//
// # Safety
// `json` is a NUL-terminated string and `out` is writable.
enum OdStatus od_model_from_json(const char *json, struct OdModel **out);

// Releases a model. Null is a no-op.
//
// # Safety
// `model` is null or a handle not yet freed.
void od_model_free(struct OdModel *model);

// Number of states; 0 for a null handle.
//
// # Safety
// `model` is null or a live handle.
uintptr_t od_model_state_count(const struct OdModel *model);

// Number of maps in the random-mapping representation; 0 for a null handle.
//
// # Safety
// `model` is null or a live handle.
uintptr_t od_model_map_count(const struct OdModel *model);

// Per-map classification as JSON.
//
// # Safety
// `model` is a live handle and `out_json` is writable.
enum OdStatus od_model_classify(const struct OdModel *model, char **out_json);

// Runs every duality check. Returns `CheckFailed` with the report filled in
// when a check fails. `variant` may be null for the model's default.
//
// # Safety
// `model` is a live handle, `variant` is null or NUL-terminated and
// `out_json` is writable.
enum OdStatus od_verify(const struct OdModel *model,
                        const char *variant_name,
                        double t,
                        double tol,
                        bool exact,
                        uint64_t seed,
                        uintptr_t logs,
                        char **out_json);

// Monte Carlo estimate of both sides of the duality as JSON. Null `x0`, `y0`
// or `variant` select the defaults; states are given by label or index.
//
// # Safety
// `model` is a live handle, the string arguments are null or
// NUL-terminated and `out_json` is writable.
enum OdStatus od_simulate_duality(const struct OdModel *model,
                                  const char *variant_name,
                                  const char *x0,
                                  const char *y0,
                                  double t,
                                  uint64_t n,
                                  uint64_t seed,
                                  uintptr_t jobs,
                                  char **out_json);

// SVG of a diagram sampled on `[0, t]`.
//
// # Safety
// `model` is a live handle and `out_svg` is writable.
enum OdStatus od_render_svg(const struct OdModel *model, double t, uint64_t seed, char **out_svg);

// Releases a string returned by this library. Null is a no-op.
//
// # Safety
// `s` is null or a string from this library not yet freed.
void od_string_free(char *s);

// Message of the last failure on this thread, or null after a success.
// Valid until the next call on the same thread; not to be freed.
const char *od_last_error_message(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ORDERDUAL_H */

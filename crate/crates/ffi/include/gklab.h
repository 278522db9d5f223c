#ifndef GKLAB_H
#define GKLAB_H

/* Generated by cbindgen from gklab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>
#include <stdint.h>
#include <stddef.h>

/*
 Status codes returned by every fallible call.
 */
typedef enum GkStatus {
  GK_STATUS_OK = 0,
  GK_STATUS_INPUT_ERROR = 1,
  GK_STATUS_RESOURCE_ERROR = 2,
  GK_STATUS_INTERNAL_ERROR = 3,
  GK_STATUS_PARSE_ERROR = 4,
  GK_STATUS_NULL_POINTER = 5,
  GK_STATUS_UTF8_ERROR = 6,
  GK_STATUS_BUFFER_TOO_SMALL = 7,
} GkStatus;

/*
 Opaque circuit handle.
 */
typedef struct GkCircuit GkCircuit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message from the most recent failing call on this thread. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *gklab_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *gklab_version(void);

/*
 Release a string returned by this library.

 # Safety
 `s` must be a pointer previously returned through one of this library's
 string out-parameters, not yet freed; NULL is ignored.
 */
void gklab_string_free(char *s);

/*
 Parse a circuit from its text format.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer; on
 `Ok` the handle written to `out` must be released with
 [`gklab_circuit_free`].
 */
enum GkStatus gklab_circuit_parse(const char *text, struct GkCircuit **out);

/*
 Release a circuit handle. NULL is ignored.

 # Safety
 `c` must come from [`gklab_circuit_parse`] and not be freed twice.
 */
void gklab_circuit_free(struct GkCircuit *c);

/*
 Number of inputs; -1 on a null handle.

 # Safety
 `c` must be a live handle or NULL.
 */
int32_t gklab_circuit_ninputs(const struct GkCircuit *c);

/*
 Number of outputs; -1 on a null handle.

 # Safety
 `c` must be a live handle or NULL.
 */
int32_t gklab_circuit_noutputs(const struct GkCircuit *c);

/*
 Gate count (negations excluded); -1 on a null handle.

 # Safety
 `c` must be a live handle or NULL.
 */
int64_t gklab_circuit_size(const struct GkCircuit *c);

/*
 Depth (negations excluded); -1 on a null handle.

 # Safety
 `c` must be a live handle or NULL.
 */
int32_t gklab_circuit_depth(const struct GkCircuit *c);

/*
 Serialize a circuit back to its text format.

 # Safety
 `c` must be a live handle, `name` NUL-terminated, `out` valid; the
 returned string is released with [`gklab_string_free`].
 */
enum GkStatus gklab_circuit_serialize(const struct GkCircuit *c, const char *name, char **out);

/*
 Evaluate at one input point. `bits[i]` holds `x_{i+1}` as 0/1; one byte
 per output is written to `out`.

 # Safety
 `bits` must hold `nbits` readable bytes and `out` `nout` writable bytes.
 */
enum GkStatus gklab_circuit_eval(const struct GkCircuit *c,
                                 const uint8_t *bits,
                                 uintptr_t nbits,
                                 uint8_t *out,
                                 uintptr_t nout);

/*
 Exhaustive truth table of one output, packed 8 points per byte: point
 `x` lands in bit `x & 7` of byte `x >> 3`. The buffer needs
 `ceil(2^n / 8)` bytes.

 # Safety
 `buf` must hold `buf_len` writable bytes.
 */
enum GkStatus gklab_circuit_truth_table(const struct GkCircuit *c,
                                        uintptr_t output,
                                        uint8_t *buf,
                                        uintptr_t buf_len);

/*
 Run the satisfiability pipeline; the report is returned as one JSON
 line (the same schema as the command-line tool).

 # Safety
 `c` must be a live handle and `out_json` a valid pointer; the returned
 string is released with [`gklab_string_free`].
 */
enum GkStatus gklab_sat(const struct GkCircuit *c,
                        uint32_t ell,
                        uint32_t repeats,
                        uint64_t seed,
                        char **out_json);

/*
 Exhaustive satisfiability scan; the report is returned as JSON.

 # Safety
 `c` must be a live handle and `out_json` a valid pointer; the returned
 string is released with [`gklab_string_free`].
 */
enum GkStatus gklab_brute_force_sat(const struct GkCircuit *c, char **out_json);

/*
 Generate a random grid instance of the hidden-linear-function problem,
 solve it, verify the solution, and return everything as JSON.

 # Safety
 `out_json` must be a valid pointer; the returned string is released
 with [`gklab_string_free`].
 */
enum GkStatus gklab_hlf_solve(uint32_t grid, uint64_t seed, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GKLAB_H */

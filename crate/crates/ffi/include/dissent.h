/* C interface to the dissent opinion-dynamics engine. */

#ifndef DISSENT_H
#define DISSENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Anything but `Ok` leaves a message for
 * [`dissent_last_error`] on the calling thread.
 */
typedef enum DissentStatus {
  DissentStatus_Ok = 0,
  /**
   * A required pointer argument was NULL.
   */
  DissentStatus_NullPointer = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  DissentStatus_InvalidUtf8 = 2,
  /**
   * The document text failed to parse; the message carries the line.
   */
  DissentStatus_ParseError = 3,
  /**
   * Arguments were well-formed but describe nothing valid (bad state
   * string, unknown preset, out-of-range parameter, no init line).
   */
  DissentStatus_InvalidInput = 4,
  /**
   * The request tripped a size guard meant for interactive use.
   */
  DissentStatus_GuardExceeded = 5,
} DissentStatus;

/**
 * One finished trajectory: transient length plus the cycle it entered.
 */
typedef struct DissentCycle DissentCycle;

/**
 * A parsed system: graph, rules, and any initial states from the document.
 */
typedef struct DissentSystem DissentSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message from the most recent failed call on this thread, or NULL if
 * the last call succeeded. The pointer stays valid until the next failed
 * call on the same thread; do not free it.
 */
const char *dissent_last_error(void);

/**
 * Free a string returned by this library. NULL is tolerated.
 *
 * # Safety
 * `s` must be a pointer previously returned by one of the `*_render`,
 * `*_state`, or `*_sequence` functions, and not freed before.
 */
void dissent_string_free(char *s);

/**
 * Parse a system document (the same text format the CLI reads) into a
 * handle. On success writes the handle to `out`; free it with
 * [`dissent_system_free`].
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must point to writable
 * storage for one pointer.
 */
enum DissentStatus dissent_system_parse(const char *text, struct DissentSystem **out);

/**
 * Build one of the named demo systems: "single_edge", "k33", or "cube3".
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must point to writable
 * storage for one pointer.
 */
enum DissentStatus dissent_generate_preset(const char *name, struct DissentSystem **out);

/**
 * Build the long-period gadget on 2k + 8 vertices (k >= 2), rules and
 * starting state included; its orbit has period 2k + 1.
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
enum DissentStatus dissent_generate_gk(uint32_t k, struct DissentSystem **out);

/**
 * Release a system handle. NULL is tolerated.
 *
 * # Safety
 * `sys` must come from a successful `dissent_system_parse` /
 * `dissent_generate_*` call and must not be used afterwards.
 */
void dissent_system_free(struct DissentSystem *sys);

/**
 * Number of vertices, or 0 if `sys` is NULL.
 *
 * # Safety
 * `sys` must be a live handle or NULL.
 */
uint32_t dissent_system_vertex_count(const struct DissentSystem *sys);

/**
 * Number of `init` lines the document carried, or 0 if `sys` is NULL.
 *
 * # Safety
 * `sys` must be a live handle or NULL.
 */
uint32_t dissent_system_init_count(const struct DissentSystem *sys);

/**
 * Render the system back to document text (rules and init lines included).
 * Returns NULL if `sys` is NULL; free the result with
 * [`dissent_string_free`].
 *
 * # Safety
 * `sys` must be a live handle or NULL.
 */
char *dissent_system_render(const struct DissentSystem *sys);

/**
 * Run one trajectory until it enters a cycle. `state` selects the start:
 * a ± string of length n, or NULL to use the document's first init line.
 * `cap` bounds the steps taken (0 means the full state-space bound). On
 * success writes a cycle handle to `out`; free it with
 * [`dissent_cycle_free`].
 *
 * # Safety
 * `sys` must be a live handle; `state` NULL or NUL-terminated; `out` must
 * point to writable storage for one pointer.
 */
enum DissentStatus dissent_run_to_cycle(const struct DissentSystem *sys,
                                        const char *state,
                                        uint64_t cap,
                                        struct DissentCycle **out);

/**
 * Release a cycle handle. NULL is tolerated.
 *
 * # Safety
 * `cycle` must come from a successful `dissent_run_to_cycle` call and must
 * not be used afterwards.
 */
void dissent_cycle_free(struct DissentCycle *cycle);

/**
 * The cycle's period, or 0 if `cycle` is NULL.
 *
 * # Safety
 * `cycle` must be a live handle or NULL.
 */
uint32_t dissent_cycle_period(const struct DissentCycle *cycle);

/**
 * Steps taken before the first recurrent state, or 0 if `cycle` is NULL.
 *
 * # Safety
 * `cycle` must be a live handle or NULL.
 */
uint64_t dissent_cycle_transient(const struct DissentCycle *cycle);

/**
 * The cycle state at `index` (0 .. period) as a ± string, or NULL if the
 * handle is NULL or the index is out of range. Free the result with
 * [`dissent_string_free`].
 *
 * # Safety
 * `cycle` must be a live handle or NULL.
 */
char *dissent_cycle_state(const struct DissentCycle *cycle, uint32_t index);

/**
 * Vertex 1's opinions around the cycle as a ± string, or NULL if `cycle`
 * is NULL. Free the result with [`dissent_string_free`].
 *
 * # Safety
 * `cycle` must be a live handle or NULL.
 */
char *dissent_cycle_hub_sequence(const struct DissentCycle *cycle);

/**
 * Histogram of eventual periods over the whole state space. Writes up to
 * `capacity` (period, count) pairs into `periods_out` / `counts_out` in
 * ascending period order and stores the full entry count in `total_out`;
 * call with `capacity` 0 to size the buffers first.
 *
 * # Safety
 * `sys` must be a live handle; `total_out` must point to writable storage;
 * the two arrays must hold at least `capacity` elements each when
 * `capacity` is nonzero.
 */
enum DissentStatus dissent_period_counts(const struct DissentSystem *sys,
                                         uint32_t *periods_out,
                                         uint64_t *counts_out,
                                         uintptr_t capacity,
                                         uintptr_t *total_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISSENT_H */

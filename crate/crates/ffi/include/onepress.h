#ifndef ONEPRESS_H
#define ONEPRESS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Size of the key buffer in [`OpEvent`], terminating NUL included.
 */
#define OP_KEY_CAPACITY 32

typedef enum OpStatus {
  OP_STATUS_OK = 0,
  /**
   * A queue had nothing left; not an error.
   */
  OP_STATUS_EMPTY = 1,
  OP_STATUS_NULL_POINTER = 2,
  OP_STATUS_INVALID_ARGUMENT = 3,
  OP_STATUS_INVALID_CONFIG = 4,
  OP_STATUS_NON_MONOTONIC = 5,
  OP_STATUS_PANIC = 6,
} OpStatus;

typedef enum OpEventKind {
  OP_EVENT_KIND_CLASSICAL_DEPRESS = 0,
  OP_EVENT_KIND_CLASSICAL_RELEASE = 1,
  OP_EVENT_KIND_ONE_PRESS_ENTER = 2,
  OP_EVENT_KIND_MEDIUM_REPEAT = 3,
  OP_EVENT_KIND_HARD_REPEAT = 4,
  OP_EVENT_KIND_ONE_PRESS_RELEASE = 5,
} OpEventKind;

typedef enum OpApexClass {
  OP_APEX_CLASS_NONE = 0,
  OP_APEX_CLASS_MEDIUM = 1,
  OP_APEX_CLASS_HARD = 2,
} OpApexClass;

typedef enum OpInputKind {
  OP_INPUT_KIND_ONE_PRESS_ENTER = 0,
  OP_INPUT_KIND_MEDIUM_REPEAT = 1,
  OP_INPUT_KIND_HARD_REPEAT = 2,
  OP_INPUT_KIND_ONE_PRESS_RELEASE = 3,
  OP_INPUT_KIND_TICK = 4,
} OpInputKind;

typedef enum OpDirectiveKind {
  OP_DIRECTIVE_KIND_SHOW_MENU = 0,
  OP_DIRECTIVE_KIND_HIGHLIGHT = 1,
  OP_DIRECTIVE_KIND_SHOW_PREVIEW = 2,
  OP_DIRECTIVE_KIND_HIDE_PREVIEW = 3,
  OP_DIRECTIVE_KIND_COMMIT_OUTPUT = 4,
  OP_DIRECTIVE_KIND_INVALID_COMMIT = 5,
  OP_DIRECTIVE_KIND_DISMISS_ALL = 6,
  OP_DIRECTIVE_KIND_WARNING = 7,
} OpDirectiveKind;

typedef enum OpPhase {
  OP_PHASE_INACTIVE = 0,
  OP_PHASE_MENU_OPEN = 1,
  OP_PHASE_PREVIEW_ACTIVE = 2,
  OP_PHASE_COMMITTED = 3,
  OP_PHASE_ABORTED = 4,
} OpPhase;

typedef struct OpDetector OpDetector;

typedef struct OpEngine OpEngine;

/**
 * Mirrors the detector configuration; see the Rust crate for field meaning.
 */
typedef struct OpDetectorConfig {
  double usable_floor_n;
  double usable_ceiling_n;
  double soft_band_max_n;
  uint64_t hold_timeout_ms;
  size_t smooth_window_samples;
  double onset_slope_n_per_s;
  double medium_min_apex_n;
  double hard_min_apex_n;
  uint64_t refractory_ms;
  double release_floor_n;
} OpDetectorConfig;

typedef struct OpEvent {
  uint64_t t_ms;
  enum OpEventKind kind;
  /**
   * Apex force for peak events, 0 otherwise.
   */
  double apex_n;
  bool has_apex;
  /**
   * NUL-terminated key name.
   */
  char key[OP_KEY_CAPACITY];
} OpEvent;

typedef struct OpDirective {
  uint64_t t_ms;
  enum OpDirectiveKind kind;
  /**
   * 1-based menu position the directive refers to, 0 if none.
   */
  size_t cursor;
} OpDirective;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or "". The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *op_last_error_message(void);

struct OpDetectorConfig op_detector_config_default(void);

/**
 * Creates a detector. `config` may be NULL for defaults.
 *
 * # Safety
 * `config` must be NULL or point to a valid config; `out` must be valid
 * for writes.
 */
enum OpStatus op_detector_new(const struct OpDetectorConfig *config, struct OpDetector **out);

/**
 * Feeds one sample. Resulting events are queued on the handle.
 *
 * # Safety
 * `detector` must come from [`op_detector_new`]; `key` must be a
 * NUL-terminated string.
 */
enum OpStatus op_detector_feed(struct OpDetector *detector,
                               uint64_t t_ms,
                               const char *key,
                               double force_n);

/**
 * Closes every open cycle; the closing events are queued.
 *
 * # Safety
 * `detector` must come from [`op_detector_new`].
 */
enum OpStatus op_detector_finish(struct OpDetector *detector);

/**
 * Pops the oldest queued event into `out`.
 *
 * # Safety
 * `detector` must come from [`op_detector_new`]; `out` must be valid for
 * writes.
 */
enum OpStatus op_detector_next_event(struct OpDetector *detector, struct OpEvent *out);

/**
 * # Safety
 * `detector` must be NULL or come from [`op_detector_new`], and must not
 * be used afterwards.
 */
void op_detector_free(struct OpDetector *detector);

/**
 * Labels an apex force. `config` may be NULL for defaults.
 *
 * # Safety
 * `config` must be NULL or point to a valid config.
 */
enum OpApexClass op_classify_apex(double apex_n, const struct OpDetectorConfig *config);

/**
 * Creates a menu engine over `menu_size` numbered options.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum OpStatus op_engine_new(size_t menu_size,
                            uint64_t dwell_ms,
                            double preview_contrast,
                            struct OpEngine **out);

/**
 * Applies one input; resulting directives are queued.
 *
 * # Safety
 * `engine` must come from [`op_engine_new`].
 */
enum OpStatus op_engine_step(struct OpEngine *engine, enum OpInputKind kind, uint64_t t_ms);

/**
 * Time at which a `Tick` would next change the engine state.
 * Returns `OP_STATUS_EMPTY` if no dwell is pending.
 *
 * # Safety
 * `engine` must come from [`op_engine_new`]; `out_t_ms` must be valid for
 * writes.
 */
enum OpStatus op_engine_next_deadline(const struct OpEngine *engine, uint64_t *out_t_ms);

/**
 * Pops the oldest queued directive into `out`.
 *
 * # Safety
 * `engine` must come from [`op_engine_new`]; `out` must be valid for
 * writes.
 */
enum OpStatus op_engine_next_directive(struct OpEngine *engine, struct OpDirective *out);

/**
 * Current phase and cursor (0 when nothing is selected).
 *
 * # Safety
 * `engine` must come from [`op_engine_new`]; the out pointers must be
 * valid for writes.
 */
enum OpStatus op_engine_phase(const struct OpEngine *engine,
                              enum OpPhase *out_phase,
                              size_t *out_cursor);

/**
 * # Safety
 * `engine` must be NULL or come from [`op_engine_new`], and must not be
 * used afterwards.
 */
void op_engine_free(struct OpEngine *engine);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEPRESS_H */

#ifndef PFC_H
#define PFC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum PfcStatus {
  PFC_STATUS_OK = 0,
  PFC_STATUS_NULL_POINTER = 1,
  PFC_STATUS_INVALID_UTF8 = 2,
  PFC_STATUS_PARSE = 3,
  PFC_STATUS_INVALID_ARGUMENT = 4,
  PFC_STATUS_ILLEGAL_MOVE = 5,
  PFC_STATUS_CONFIG = 6,
  PFC_STATUS_BACKEND = 7,
  PFC_STATUS_IO = 8,
  PFC_STATUS_PANIC = 9,
} PfcStatus;

// A task configuration (three lists or a room).
typedef struct PfcConfiguration PfcConfiguration;

// An emitted plan with its run diagnostics.
typedef struct PfcPlan PfcPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *pfc_last_error_message(void);

// Library version as a static string.
const char *pfc_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void pfc_string_free(char *s);

// Parses `A = [..]`, `B = [..]`, `C = [..]` lines or a `room N` phrase.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum PfcStatus pfc_configuration_parse(const char *text, struct PfcConfiguration **out);

// Canonical text form of a configuration.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum PfcStatus pfc_configuration_render(const struct PfcConfiguration *config, char **out);

// # Safety
// `config` must come from this library and not have been freed. Null is ignored.
void pfc_configuration_free(struct PfcConfiguration *config);

// Whether `move_text` (e.g. `Move 2 from A to C.`) obeys the rules in `config`.
//
// # Safety
// Pointers must be valid; `move_text` NUL-terminated.
enum PfcStatus pfc_is_legal_move(const struct PfcConfiguration *config,
                                 const char *move_text,
                                 bool *out_legal);

// Minimum number of moves between two list configurations.
//
// # Safety
// Pointers must be valid.
enum PfcStatus pfc_bfs_optimal(const struct PfcConfiguration *from,
                               const struct PfcConfiguration *goal,
                               uint32_t *out_steps);

// Plans from `initial` to `goal` with the rule-exact backend, branching
// `branches`, depth `depth` and at most `budget` actions.
//
// # Safety
// Pointers must be valid; `out` must be writable.
enum PfcStatus pfc_plan_oracle(const struct PfcConfiguration *initial,
                               const struct PfcConfiguration *goal,
                               uint32_t branches,
                               uint32_t depth,
                               uint32_t budget,
                               struct PfcPlan **out);

// Number of actions in `plan`; 0 for null.
//
// # Safety
// `plan` must be a live handle or null.
size_t pfc_plan_len(const struct PfcPlan *plan);

// Action `index` as text, borrowed from the plan; null when out of range.
//
// # Safety
// `plan` must be a live handle or null.
const char *pfc_plan_action(const struct PfcPlan *plan, size_t index);

// Whether the coordinator confirmed the goal.
//
// # Safety
// `plan` must be a live handle or null.
bool pfc_plan_goal_confirmed(const struct PfcPlan *plan);

// Error that ended plan generation early, or null.
//
// # Safety
// `plan` must be a live handle or null.
const char *pfc_plan_error(const struct PfcPlan *plan);

// # Safety
// `plan` must come from this library and not have been freed. Null is ignored.
void pfc_plan_free(struct PfcPlan *plan);

// Runs an experiment described by a JSON config and returns the summary JSON.
//
// # Safety
// `config_json` must be NUL-terminated; `out_summary` must be writable.
enum PfcStatus pfc_run_experiment_json(const char *config_json, char **out_summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PFC_H */

#ifndef SOFTSTEP_H
#define SOFTSTEP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SoftstepContact {
  SOFTSTEP_CONTACT_NONE = 0,
  SOFTSTEP_CONTACT_GROUND = 1,
  SOFTSTEP_CONTACT_PLATFORM = 2,
} SoftstepContact;

typedef enum SoftstepPlatformState {
  SOFTSTEP_PLATFORM_STATE_INACTIVE = 0,
  SOFTSTEP_PLATFORM_STATE_RISING = 1,
  SOFTSTEP_PLATFORM_STATE_HOLD = 2,
  SOFTSTEP_PLATFORM_STATE_COLLAPSING = 3,
} SoftstepPlatformState;

typedef enum SoftstepStatus {
  SOFTSTEP_STATUS_OK = 0,
  SOFTSTEP_STATUS_NULL_ARGUMENT = 1,
  SOFTSTEP_STATUS_INVALID_UTF8 = 2,
  SOFTSTEP_STATUS_SCENARIO = 3,
  SOFTSTEP_STATUS_IO = 4,
  SOFTSTEP_STATUS_INVALID_PARAMETER = 5,
  SOFTSTEP_STATUS_OUT_OF_TERRAIN = 6,
  SOFTSTEP_STATUS_FELL_OVER = 7,
  /**
   * The walk reached the far edge of the terrain; the world did not move.
   */
  SOFTSTEP_STATUS_EDGE_REACHED = 8,
  SOFTSTEP_STATUS_PANIC = 9,
} SoftstepStatus;

/**
 * Parsed scenario.
 */
typedef struct SoftstepScenario SoftstepScenario;

/**
 * Simulation world built from a scenario.
 */
typedef struct SoftstepWorld SoftstepWorld;

typedef struct SoftstepVec3 {
  double x;
  double y;
  double z;
} SoftstepVec3;

/**
 * One simulated frame. Index 0 of the per-foot arrays is the left foot.
 */
typedef struct SoftstepFrame {
  uint64_t frame;
  double time;
  struct SoftstepVec3 com;
  double tilt;
  double tilt_rate;
  double torque;
  double beta;
  struct SoftstepVec3 foot_position[2];
  struct SoftstepVec3 foot_target[2];
  enum SoftstepContact foot_contact[2];
  enum SoftstepPlatformState platform_state[2];
  double platform_height[2];
  double carved;
  double deposited;
} SoftstepFrame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL, or
 * 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t softstep_last_error_message(char *buf, size_t len);

/**
 * Parses scenario text. On success `*out` receives a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SoftstepStatus softstep_scenario_parse(const char *text, struct SoftstepScenario **out);

/**
 * Loads a scenario file. On success `*out` receives a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SoftstepStatus softstep_scenario_load(const char *path, struct SoftstepScenario **out);

/**
 * Replaces one value, given as `section.key=value`. The scenario is left
 * unchanged on failure.
 *
 * # Safety
 * `scenario` must be a live handle and `assignment` a NUL-terminated string.
 */
enum SoftstepStatus softstep_scenario_set(struct SoftstepScenario *scenario,
                                          const char *assignment);

/**
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void softstep_scenario_free(struct SoftstepScenario *scenario);

/**
 * Builds a world at the start of the scenario's walk.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum SoftstepStatus softstep_world_new(const struct SoftstepScenario *scenario,
                                       struct SoftstepWorld **out);

/**
 * Advances one frame and fills `*frame`. Returns
 * [`SoftstepStatus::EdgeReached`] without touching `*frame` when the walk
 * is over; any error status leaves the world unusable.
 *
 * # Safety
 * `world` must be a live handle and `frame` a valid pointer.
 */
enum SoftstepStatus softstep_world_step(struct SoftstepWorld *world, struct SoftstepFrame *frame);

/**
 * Ground height under `(x, z)`.
 *
 * # Safety
 * `world` must be a live handle and `out` a valid pointer.
 */
enum SoftstepStatus softstep_world_sample_height(const struct SoftstepWorld *world,
                                                 double x,
                                                 double z,
                                                 double *out);

/**
 * Sum of cell heights times cell area (m³).
 *
 * # Safety
 * `world` must be a live handle and `out` a valid pointer.
 */
enum SoftstepStatus softstep_world_total_volume(const struct SoftstepWorld *world, double *out);

/**
 * # Safety
 * `world` must be null or a handle not yet freed.
 */
void softstep_world_free(struct SoftstepWorld *world);

/**
 * Runs the whole scenario and writes its artifacts into `out_dir`.
 * `*exit_code` receives 0 for a completed walk, 2 for a fall and 1 for a
 * failed frame.
 *
 * # Safety
 * `scenario` must be a live handle, `out_dir` a NUL-terminated string and
 * `exit_code` a valid pointer.
 */
enum SoftstepStatus softstep_run(const struct SoftstepScenario *scenario,
                                 const char *out_dir,
                                 bool deterministic,
                                 int32_t *exit_code);

/**
 * Push of a foot at `foot` on a grass point `p`.
 */
struct SoftstepVec3 softstep_displacement(struct SoftstepVec3 p,
                                          struct SoftstepVec3 foot,
                                          double t_max,
                                          double gamma);

/**
 * Swing gain for grass of `class_height`.
 */
double softstep_beta_for_vegetation(double class_height, double base_beta, double min_beta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOFTSTEP_H */

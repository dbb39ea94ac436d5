/* C interface for the trackgraph multi-object tracking engine. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum TgStatus {
  TG_STATUS_OK = 0,
  TG_STATUS_NULL_ARGUMENT = 1,
  TG_STATUS_PARSE_ERROR = 2,
  TG_STATUS_CONFIG_ERROR = 3,
  TG_STATUS_IO_ERROR = 4,
  TG_STATUS_SOLVER_ERROR = 5,
  TG_STATUS_INVALID_UTF8 = 6,
  TG_STATUS_PANIC = 7,
} TgStatus;

/**
 * Detection file layout.
 */
typedef enum TgFormat {
  TG_FORMAT_MOT_CSV = 0,
  TG_FORMAT_APIDIS_CSV = 1,
} TgFormat;

/**
 * Solver selection for offline tracking.
 */
typedef enum TgSolver {
  TG_SOLVER_CONFIG_DEFAULT = 0,
  TG_SOLVER_JOINT = 1,
  TG_SOLVER_NODEWISE = 2,
} TgSolver;

/**
 * Opaque pipeline configuration.
 */
typedef struct TgConfig TgConfig;

/**
 * Opaque detection set.
 */
typedef struct TgDetections TgDetections;

/**
 * Opaque track set.
 */
typedef struct TgTracks TgTracks;

/**
 * CLEAR-MOT summary returned by value.
 */
typedef struct TgEvalReport {
  double mota;
  double motp;
  uint64_t switches;
  uint64_t misses;
  uint64_t false_positives;
  uint64_t matches;
  uint64_t gt_boxes;
} TgEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *tg_version(void);

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tg_last_error(void);

/**
 * Default configuration; free with [`tg_config_free`].
 */
struct TgConfig *tg_config_default(void);

/**
 * Loads a key = value configuration file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum TgStatus tg_config_load(const char *path, struct TgConfig **out);

/**
 * # Safety
 * `cfg` must come from this library and not have been freed.
 */
void tg_config_free(struct TgConfig *cfg);

/**
 * Parses a detection file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum TgStatus tg_detections_load(const char *path, enum TgFormat format, struct TgDetections **out);

/**
 * Number of detections behind the handle; 0 for null.
 *
 * # Safety
 * `dets` must come from this library if non-null.
 */
uintptr_t tg_detections_len(const struct TgDetections *dets);

/**
 * # Safety
 * `dets` must come from this library and not have been freed.
 */
void tg_detections_free(struct TgDetections *dets);

/**
 * Runs the offline tracking pipeline.
 *
 * # Safety
 * `cfg` and `dets` must be valid handles from this library; `out` must be a
 * valid pointer.
 */
enum TgStatus tg_track_offline(const struct TgConfig *cfg,
                               const struct TgDetections *dets,
                               enum TgSolver solver,
                               uint32_t workers,
                               struct TgTracks **out);

/**
 * Runs the online (incremental) tracking pipeline. `window <= 0` keeps the
 * configured observation window.
 *
 * # Safety
 * `cfg` and `dets` must be valid handles from this library; `out` must be a
 * valid pointer.
 */
enum TgStatus tg_track_online(const struct TgConfig *cfg,
                              const struct TgDetections *dets,
                              int64_t window,
                              struct TgTracks **out);

/**
 * Number of tracks behind the handle; 0 for null.
 *
 * # Safety
 * `tracks` must come from this library if non-null.
 */
uintptr_t tg_tracks_len(const struct TgTracks *tracks);

/**
 * Loads a track CSV file (also used for ground truth).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum TgStatus tg_tracks_load(const char *path, struct TgTracks **out);

/**
 * Writes tracks as `frame,track_id,x,y,w,h` CSV.
 *
 * # Safety
 * `tracks` must be a valid handle; `path` a valid NUL-terminated string.
 */
enum TgStatus tg_tracks_write(const struct TgTracks *tracks, const char *path);

/**
 * # Safety
 * `tracks` must come from this library and not have been freed.
 */
void tg_tracks_free(struct TgTracks *tracks);

/**
 * CLEAR-MOT evaluation of `tracks` against `gt`. `rule` is `"dist:30"` /
 * `"iou:0.5"` style; null keeps the default distance rule.
 *
 * # Safety
 * `tracks` and `gt` must be valid handles; `out` a valid pointer; `rule`
 * null or a valid NUL-terminated string.
 */
enum TgStatus tg_eval(const struct TgTracks *tracks,
                      const struct TgTracks *gt,
                      const char *rule,
                      struct TgEvalReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

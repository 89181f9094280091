// Copyright 2026 The mace-matting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// C interface to the matting library. Every object is an opaque handle
// created and destroyed through this header. Functions returning
// mace_status leave a message for mace_last_error() on failure; the message
// is per thread and stays valid until the next failing call on that thread.

#ifndef MACE_MACE_H_
#define MACE_MACE_H_

#include <stddef.h>

#if defined(MACE_BUILDING_LIBRARY)
#define MACE_API __attribute__((visibility("default")))
#else
#define MACE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mace_status {
  MACE_OK = 0,
  MACE_ERR_INVALID_ARGUMENT = 1,
  MACE_ERR_DIMENSION_MISMATCH = 2,
  MACE_ERR_IO = 3,
  MACE_ERR_NUMERIC = 4,
  MACE_ERR_NOT_CONVERGED = 5,
  MACE_ERR_INDEFINITE = 6,
  MACE_ERR_INTERNAL = 7,
  /* A batch ran but at least one frame failed; results are still returned. */
  MACE_ERR_BATCH_FAILED = 8
} mace_status;

typedef struct mace_config mace_config;
typedef struct mace_image mace_image;
typedef struct mace_batch mace_batch;
typedef struct mace_report mace_report;
typedef struct mace_synth mace_synth;

MACE_API const char* mace_version(void);
MACE_API const char* mace_status_string(mace_status status);
MACE_API const char* mace_last_error(void);

/* ---- configuration ---------------------------------------------------- */

MACE_API mace_status mace_config_create(mace_config** out);
MACE_API void mace_config_destroy(mace_config* config);
MACE_API mace_status mace_config_set(mace_config* config, const char* key,
                                     const char* value);
/* Writes the value's text form into buf (always NUL-terminated when
   buf_len > 0). *needed, if non-null, receives the full length + 1. */
MACE_API mace_status mace_config_get(const mace_config* config, const char* key,
                                     char* buf, size_t buf_len, size_t* needed);
/* Applies "key = value" lines from a file on top of the current values. */
MACE_API mace_status mace_config_load(mace_config* config, const char* path);
MACE_API mace_status mace_config_validate(const mace_config* config);
MACE_API size_t mace_config_key_count(void);
MACE_API const char* mace_config_key(size_t index);

/* ---- images and mattes ------------------------------------------------ */

/* channels is 3 for color images and 1 for mattes. Pixel data is row-major
   and channel-interleaved, values nominally in [0,1]. */
MACE_API mace_status mace_image_create(int width, int height, int channels,
                                       mace_image** out);
MACE_API mace_status mace_image_load(const char* path, int channels,
                                     mace_image** out);
MACE_API mace_status mace_image_save(const mace_image* image, const char* path,
                                     int bit_depth);
MACE_API void mace_image_destroy(mace_image* image);
MACE_API int mace_image_width(const mace_image* image);
MACE_API int mace_image_height(const mace_image* image);
MACE_API int mace_image_channels(const mace_image* image);
MACE_API double* mace_image_data(mace_image* image);
MACE_API const double* mace_image_const_data(const mace_image* image);

/* ---- single-frame extraction ------------------------------------------ */

typedef struct mace_extract_stats {
  int iterations;
  int converged;
  double final_residual;
  double consensus_residual;
  double max_agent_residual;
  int equilibrium_pass;
} mace_extract_stats;

/* frame and plate must be 3-channel; *matte_out is a new 1-channel image.
   stats may be null. */
MACE_API mace_status mace_extract(const mace_config* config, const mace_image* frame,
                                  const mace_image* plate, mace_image** matte_out,
                                  mace_extract_stats* stats);

/* ---- metrics ---------------------------------------------------------- */

MACE_API mace_status mace_metrics(const mace_image* pred, const mace_image* truth,
                                  int tol_px, double* iou, double* mae,
                                  double* contour_f);
/* pred and truth are both files or both directories (paired by filename). */
MACE_API mace_status mace_evaluate_paths(const char* pred, const char* truth,
                                         int tol_px, mace_report** out);

/* ---- batches ---------------------------------------------------------- */

MACE_API mace_status mace_batch_create(mace_batch** out);
MACE_API void mace_batch_destroy(mace_batch* batch);
/* truth may be null. */
MACE_API mace_status mace_batch_add(mace_batch* batch, const char* frame,
                                    const char* plate, const char* output,
                                    const char* truth);
/* Every image in frames_dir except the plate; truth_dir may be null. */
MACE_API mace_status mace_batch_add_directory(mace_batch* batch, const char* frames_dir,
                                              const char* plate, const char* output_dir,
                                              const char* truth_dir);
/* Lines "frame plate output [truth]"; relative paths resolve against the
   manifest's directory. */
MACE_API mace_status mace_batch_add_manifest(mace_batch* batch, const char* path);
MACE_API size_t mace_batch_size(const mace_batch* batch);
/* Writes every successful matte. *report_out is set even when the result is
   MACE_ERR_BATCH_FAILED. */
MACE_API mace_status mace_batch_run(mace_batch* batch, const mace_config* config,
                                    int temporal, int bit_depth,
                                    mace_report** report_out);

/* ---- reports ---------------------------------------------------------- */

MACE_API void mace_report_destroy(mace_report* report);
/* Frames that have metrics. */
MACE_API size_t mace_report_frame_count(const mace_report* report);
MACE_API mace_status mace_report_frame(const mace_report* report, size_t index,
                                       const char** frame_id, double* iou,
                                       double* mae, double* contour_f);
MACE_API mace_status mace_report_aggregate(const mace_report* report, double* iou,
                                           double* mae, double* contour_f);
MACE_API size_t mace_report_failure_count(const mace_report* report);
MACE_API const char* mace_report_failure(const mace_report* report, size_t index);
/* Line-oriented text report; path "-" writes to stdout. */
MACE_API mace_status mace_report_write(const mace_report* report, const char* path);

/* ---- synthetic scenes ------------------------------------------------- */

typedef struct mace_scene {
  int width;
  int height;
  int frames;
  int shape; /* 0 square, 1 disk */
  int shape_size;
  double motion_x;
  double motion_y;
  double fg_rgb[3];
  double fg_texture;
  double bg_contrast;
  double color_similarity;
  double brightness_drift;
  double noise_sigma;
  int jitter_px;
} mace_scene;

MACE_API void mace_scene_defaults(mace_scene* scene);
MACE_API mace_status mace_synth_create(const mace_scene* scene, unsigned long long seed,
                                       mace_synth** out);
MACE_API void mace_synth_destroy(mace_synth* synth);
MACE_API int mace_synth_frame_count(const mace_synth* synth);
/* Each call returns a new copy owned by the caller. */
MACE_API mace_status mace_synth_plate(const mace_synth* synth, mace_image** out);
MACE_API mace_status mace_synth_frame(const mace_synth* synth, int index, mace_image** out);
MACE_API mace_status mace_synth_truth(const mace_synth* synth, int index, mace_image** out);
/* Writes plate.png, frames/NNN.png and truth/NNN.png under dir. */
MACE_API mace_status mace_synth_write(const mace_synth* synth, const char* dir,
                                      int bit_depth);

#ifdef __cplusplus
}
#endif

#endif /* MACE_MACE_H_ */

// Copyright 2026 The cenet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the cenet segmentation toolkit.
 *
 * Every fallible call returns a cenet_status; on failure a message is
 * available from cenet_last_error() on the same thread until the next call.
 * Status values double as process exit codes. */

#ifndef CENET_CENET_H_
#define CENET_CENET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CENET_API __declspec(dllexport)
#else
#define CENET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cenet_status {
  CENET_OK = 0,
  CENET_VERIFY_FAILED = 1,
  CENET_CONFIG_ERROR = 2,
  CENET_DATA_ERROR = 3,
  CENET_NUMERIC_ERROR = 4,
  CENET_INTERNAL_ERROR = 5
} cenet_status;

/* Receives one line of text (no trailing newline). */
typedef void (*cenet_write_fn)(const char* text, void* user);

typedef struct cenet_io {
  cenet_write_fn out; /* may be NULL */
  cenet_write_fn err; /* may be NULL */
  void* user;
} cenet_io;

CENET_API const char* cenet_version(void);
CENET_API const char* cenet_last_error(void);

/* ---- models ---------------------------------------------------------- */

typedef struct cenet_model cenet_model;

/* `run_config_json` is a run configuration document (only its model
 * section is used); NULL selects the default CE-Net. Parameters start
 * initialized from seed 0. */
CENET_API cenet_status cenet_model_create(const char* run_config_json, cenet_model** out);
CENET_API void cenet_model_destroy(cenet_model* model);

CENET_API cenet_status cenet_model_init(cenet_model* model, uint64_t seed);
CENET_API cenet_status cenet_model_load_weights(cenet_model* model, const char* path);
CENET_API cenet_status cenet_model_save_weights(const cenet_model* model, const char* path);

CENET_API size_t cenet_model_param_count(const cenet_model* model);
CENET_API size_t cenet_model_num_classes(const cenet_model* model);

/* Per-layer shapes and parameter counts for a size x size input. */
CENET_API cenet_status cenet_model_summary(const cenet_model* model, size_t size, const cenet_io* io);

/* image: planar RGB [3,H,W] in [0,1]; probs: caller buffer of K*H*W floats. */
CENET_API cenet_status cenet_model_predict(cenet_model* model, const float* image, size_t height, size_t width,
                                           int tta, float* probs);

/* ---- commands (mirror the command-line tool) -------------------------- */

/* resume: checkpoint sidecar or directory, or NULL. */
CENET_API cenet_status cenet_cmd_train(const char* config, const char* resume, const cenet_io* io);
/* weights: NULL for <output>/weights.cetnsr; tta: -1 config, 0 off, 1 on. */
CENET_API cenet_status cenet_cmd_eval(const char* config, const char* weights, int tta, const cenet_io* io);
CENET_API cenet_status cenet_cmd_predict(const char* config, const char* weights, const char* input,
                                         const char* output, int tta, const cenet_io* io);
CENET_API cenet_status cenet_cmd_gradcheck(uint64_t seed, const cenet_io* io);
CENET_API cenet_status cenet_cmd_rf_report(const cenet_io* io);
/* config may be NULL for the default CE-Net. */
CENET_API cenet_status cenet_cmd_summary(const char* config, size_t size, const cenet_io* io);
CENET_API cenet_status cenet_cmd_make_synthetic(const char* output, size_t count, size_t size, uint64_t seed,
                                                int multiscale, const cenet_io* io);
CENET_API cenet_status cenet_cmd_crop(const char* input, const char* output, size_t size, size_t window,
                                      const cenet_io* io);

#ifdef __cplusplus
}
#endif

#endif /* CENET_CENET_H_ */

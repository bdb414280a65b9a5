// Copyright 2026 The sgmreid Authors
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

/* C interface to the sgmreid toolkit.
 *
 * Objects are opaque handles created by *_create / *_load / producer calls and
 * released by the matching *_destroy. Every fallible call returns a
 * reid_status; on failure reid_last_error() describes the cause for the
 * calling thread. Strings returned through char** out-parameters are owned by
 * the caller and released with reid_string_free().
 */
#ifndef REID_REID_H_
#define REID_REID_H_

#include <stddef.h>
#include <stdint.h>

#if defined(REID_BUILDING_LIBRARY)
#define REID_API __attribute__((visibility("default")))
#else
#define REID_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum reid_status {
  REID_OK = 0,
  REID_E_INVALID_ARGUMENT = 1,
  REID_E_UNSUPPORTED_FORMAT = 2,
  REID_E_CORRUPT_FILE = 3,
  REID_E_DIMENSION_OVERFLOW = 4,
  REID_E_DIMENSION_MISMATCH = 5,
  REID_E_EMPTY_PIXEL_SET = 6,
  REID_E_STACK_TOO_SMALL = 7,
  REID_E_EMPTY_STRIPE = 8,
  REID_E_SOURCE_MISMATCH = 9,
  REID_E_NOT_POSITIVE_DEFINITE = 10,
  REID_E_RANK_TOO_LARGE = 11,
  REID_E_TOO_FEW_PAIRS = 12,
  REID_E_TOO_FEW_IDENTITIES = 13,
  REID_E_PROTOCOL_VIOLATION = 14,
  REID_E_ARTIFACT_MISMATCH = 15,
  REID_E_IO_FAILURE = 16,
  REID_E_NUMERIC_FAILURE = 17,
  REID_E_OUT_OF_MEMORY = 18,
  REID_E_INTERNAL = 19
} reid_status;

typedef enum reid_protocol { REID_SINGLE_SHOT = 0, REID_MULTI_SHOT = 1 } reid_protocol;
typedef enum reid_camera { REID_CAMERA_A = 0, REID_CAMERA_B = 1 } reid_camera;
typedef enum reid_method {
  REID_METHOD_CCL = 0,       /* learned subspace scoring */
  REID_METHOD_EUCLIDEAN = 1  /* negative squared distance on raw descriptors */
} reid_method;

typedef struct reid_config reid_config;
typedef struct reid_manifest reid_manifest;
typedef struct reid_descriptors reid_descriptors;
typedef struct reid_model reid_model;
typedef struct reid_report reid_report;

typedef struct reid_timing {
  size_t images;
  double mean_seconds;
  double p95_seconds;
} reid_timing;

typedef struct reid_split {
  uint64_t seed;
  double fraction; /* share of identities used for training */
  int index;       /* which of the seeded splits */
} reid_split;

typedef struct reid_train_options {
  int r;
  double ridge;
  int per_feature; /* nonzero: one model per feature kind */
  reid_split split;
} reid_train_options;

typedef struct reid_eval_options {
  reid_protocol protocol;
  reid_camera probe_camera;
  reid_method method;
  int n_splits;   /* used when no model is supplied */
  int threads;
  reid_split split;
  int r;          /* training parameters for per-split retraining */
  double ridge;
  int per_feature;
} reid_eval_options;

REID_API const char* reid_version(void);
REID_API const char* reid_last_error(void);
REID_API const char* reid_status_name(reid_status status);
REID_API void reid_string_free(char* s);

REID_API void reid_train_options_init(reid_train_options* options);
REID_API void reid_eval_options_init(reid_eval_options* options);

/* Extraction configuration. Keys: k, stripes, spaces, use_mask, epsilon0,
 * features, covariance, histogram_bins, siltp_tau, palette (file path).
 * List values are comma separated. */
REID_API reid_status reid_config_create(reid_config** out);
REID_API void reid_config_destroy(reid_config* config);
REID_API reid_status reid_config_set(reid_config* config, const char* key, const char* value);
REID_API reid_status reid_config_describe(const reid_config* config, char** json);

REID_API reid_status reid_manifest_load(const char* path, reid_manifest** out);
REID_API void reid_manifest_destroy(reid_manifest* manifest);
REID_API size_t reid_manifest_count(const reid_manifest* manifest);
REID_API size_t reid_manifest_identity_count(const reid_manifest* manifest);

/* Writes a synthetic corpus. spec_text may be NULL for defaults; seed may be
 * NULL to keep the spec seed. A nonzero clean drops noise and view shift. */
REID_API reid_status reid_synth(const char* spec_text, const uint64_t* seed, int clean,
                                const char* out_dir, reid_manifest** out);

/* Descriptor of one image. mask_path may be NULL. Writes up to capacity
 * values and stores the full dimension in *dim. */
REID_API reid_status reid_extract_image(const reid_config* config, const char* image_path,
                                        const char* mask_path, float* values, size_t capacity,
                                        size_t* dim);

REID_API reid_status reid_extract(const reid_manifest* manifest, const reid_config* config,
                                  int threads, reid_descriptors** out, reid_timing* timing);
REID_API reid_status reid_descriptors_load(const char* path, reid_descriptors** out);
REID_API reid_status reid_descriptors_save(const reid_descriptors* set, const char* path);
REID_API void reid_descriptors_destroy(reid_descriptors* set);
REID_API size_t reid_descriptors_count(const reid_descriptors* set);
REID_API size_t reid_descriptors_dim(const reid_descriptors* set);
REID_API reid_status reid_descriptors_row(const reid_descriptors* set, size_t index,
                                          const float** values, const char** source_id);
REID_API reid_status reid_descriptors_describe(const reid_descriptors* set, char** json);
REID_API reid_status reid_descriptors_csv(const reid_descriptors* set, char** csv);

/* Trains on the split named by options; warnings (may be NULL) receives
 * newline separated notices such as rank clamping. */
REID_API reid_status reid_train(const reid_descriptors* set, const reid_manifest* manifest,
                                const reid_train_options* options, reid_model** out,
                                char** warnings);
REID_API reid_status reid_model_load(const char* path, reid_model** out);
REID_API reid_status reid_model_save(const reid_model* model, const char* path);
REID_API void reid_model_destroy(reid_model* model);
REID_API reid_status reid_model_describe(const reid_model* model, char** json);

/* Score of descriptor rows probe (seen by probe_camera) and gallery (seen by
 * the other camera). */
REID_API reid_status reid_score_pair(const reid_model* model, const reid_descriptors* set,
                                     size_t probe, size_t gallery, reid_camera probe_camera,
                                     double* score);
/* Score matrix over the model's test split as CSV, one row per probe. */
REID_API reid_status reid_score_split(const reid_model* model, const reid_descriptors* set,
                                      const reid_manifest* manifest, reid_camera probe_camera,
                                      int threads, char** csv);

/* With a model the evaluation uses the model's own split. Without one the
 * CCL method retrains on each of options->n_splits splits. */
REID_API reid_status reid_evaluate(const reid_descriptors* set, const reid_manifest* manifest,
                                   const reid_model* model, const reid_eval_options* options,
                                   reid_report** out);
REID_API void reid_report_destroy(reid_report* report);
REID_API reid_status reid_report_rate(const reid_report* report, int rank, double* rate);
REID_API int reid_report_splits(const reid_report* report);
REID_API reid_status reid_report_csv(const reid_report* report, char** csv);
REID_API reid_status reid_report_text(const reid_report* report, char** text);

/* JSON summary of a descriptor file, model file, manifest or image. */
REID_API reid_status reid_inspect(const char* path, char** json);

#ifdef __cplusplus
}
#endif

#endif  /* REID_REID_H_ */

/* Copyright 2026 The MLTQNN Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License. */
/**
 * @file mltqnn.h
 * C interface of the libmltqnn shared library.
 *
 * Every function returns an mltq_status; on failure a one-line diagnostic
 * is available from mltq_last_error() on the calling thread. Handles are
 * opaque and owned by the caller, who releases them with the matching
 * *_destroy function. String outputs use the (buf, cap, needed) pattern:
 * `needed` receives the length including the terminator, and the call
 * fails with MLTQ_ERR_ARGUMENT when `cap` is too small.
 */
#ifndef MLTQNN_H
#define MLTQNN_H

#include <stddef.h>

#if defined(_WIN32)
#define MLTQ_API __declspec(dllexport)
#else
#define MLTQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mltq_status {
    MLTQ_OK = 0,
    MLTQ_ERR_INTERNAL = 1,
    MLTQ_ERR_CONFIG = 2,
    MLTQ_ERR_DATA = 3,
    MLTQ_ERR_NUMERIC = 4,
    MLTQ_ERR_ARGUMENT = 5
} mltq_status;

typedef struct mltq_config mltq_config;
typedef struct mltq_model mltq_model;
typedef struct mltq_dataset mltq_dataset;

typedef enum mltq_split { MLTQ_TRAIN = 0, MLTQ_VALIDATION = 1, MLTQ_TEST = 2 } mltq_split;

/** Diagnostic of the last failed call on this thread ("" if none). */
MLTQ_API const char *mltq_last_error(void);
MLTQ_API const char *mltq_version(void);

/* ------------------------------------------------------------- config */

/** Canonical defaults (N=32, P=4, E=9, M=2, K=2, alpha=5, lr=0.01, ...). */
MLTQ_API mltq_status mltq_config_create(mltq_config **out);
MLTQ_API void mltq_config_destroy(mltq_config *cfg);

/** Overlays the keys of a JSON config file. */
MLTQ_API mltq_status mltq_config_load_file(mltq_config *cfg, const char *path);

/**
 * Sets one key. `value` is parsed as a JSON scalar (number, true/false);
 * anything else is taken as a string. Model keys: N P E M K channels
 * num_classes alpha learning_rate batch_size epochs runs seed
 * reconstruction_enabled lwm_enabled threads. Run keys: train_fraction
 * minority ("CLASS:FRACTION") deterministic pad_to.
 */
MLTQ_API mltq_status mltq_config_set(mltq_config *cfg, const char *key, const char *value);

/** Effective configuration as JSON. */
MLTQ_API mltq_status mltq_config_to_json(const mltq_config *cfg, char *buf, size_t cap, size_t *needed);

/* ---------------------------------------------------------- commands */

/** Resource report as `key=value` lines (validated against the built circuits). */
MLTQ_API mltq_status mltq_resources(const mltq_config *cfg, char *buf, size_t cap, size_t *needed);

typedef struct mltq_synth_spec {
    size_t num_classes;
    size_t image_size;
    size_t channels;
    size_t train;
    size_t validation;
    size_t test;
    double noise;
    unsigned long long seed;
} mltq_synth_spec;

/** Defaults: 4 classes, 32x32x4, 200/100/100, noise 0.1, seed 0. */
MLTQ_API mltq_synth_spec mltq_synth_default(void);

/** Writes a dataset; reports the nearest-centroid accuracy (may be NULL). */
MLTQ_API mltq_status mltq_synth(const mltq_synth_spec *spec, const char *out_dir,
                       double *centroid_accuracy);

/** Per-epoch progress callback. */
typedef void (*mltq_epoch_fn)(size_t run, size_t epoch, double loss, double val_loss,
                              double val_acc, void *user);

/**
 * Trains `runs` models on `data_dir` and writes under `out_dir`: config.json,
 * metrics_run<r>.csv, steps_run<r>.csv, checkpoint_run<r>.{json,bin} (best
 * validation loss) and summary.csv. On divergence the partial metrics are
 * written and MLTQ_ERR_NUMERIC is returned.
 */
MLTQ_API mltq_status mltq_train(const mltq_config *cfg, const char *data_dir, const char *out_dir,
                       mltq_epoch_fn progress, void *user, double *mean_test_accuracy,
                       double *std_test_accuracy);

/**
 * Evaluates a checkpoint on the test split; writes eval_summary.csv and
 * eval_per_class.csv. Structural keys set explicitly on `cfg` must agree
 * with the checkpoint (MLTQ_ERR_CONFIG otherwise).
 */
MLTQ_API mltq_status mltq_eval(const mltq_config *cfg, const char *checkpoint, const char *data_dir,
                      const char *out_dir, double *accuracy);

/**
 * Feature-magnitude ranking (magnitudes.csv) and, if `with_ami`, k-means
 * (k = num_classes) AMI of processed images and feature vectors against the
 * labels (ami.csv), over the test split.
 */
MLTQ_API mltq_status mltq_analyze(const mltq_config *cfg, const char *checkpoint, const char *data_dir,
                         const char *out_dir, int with_ami);

/* ------------------------------------------------------------ handles */

MLTQ_API mltq_status mltq_model_load(const char *checkpoint, mltq_model **out);
MLTQ_API void mltq_model_destroy(mltq_model *model);
MLTQ_API size_t mltq_model_image_size(const mltq_model *model);
MLTQ_API size_t mltq_model_channels(const mltq_model *model);
MLTQ_API size_t mltq_model_num_classes(const mltq_model *model);
MLTQ_API size_t mltq_model_num_features(const mltq_model *model);

/**
 * One image, row-major (row, col, channel), `len` = N*N*channels values.
 * `probs` receives num_classes values; `features` (may be NULL) receives
 * num_features values.
 */
MLTQ_API mltq_status mltq_model_forward(const mltq_model *model, const double *image, size_t len,
                               double *probs, double *features);

/** Loads and normalizes a dataset honouring the run keys of `cfg` (may be NULL). */
MLTQ_API mltq_status mltq_dataset_load(const char *dir, const mltq_config *cfg, mltq_dataset **out);
MLTQ_API void mltq_dataset_destroy(mltq_dataset *ds);
MLTQ_API size_t mltq_dataset_count(const mltq_dataset *ds, mltq_split split);
MLTQ_API size_t mltq_dataset_num_classes(const mltq_dataset *ds);

/** Copies image `index` of `split` (N*N*channels doubles) and its label. */
MLTQ_API mltq_status mltq_dataset_get(const mltq_dataset *ds, mltq_split split, size_t index,
                             double *image, size_t len, size_t *label);

#ifdef __cplusplus
}
#endif

#endif /* MLTQNN_H */

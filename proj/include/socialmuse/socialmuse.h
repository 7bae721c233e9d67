/* Copyright (C) 2026 SocialMuse contributors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SOCIALMUSE_H
#define SOCIALMUSE_H

#include <stddef.h>

#if defined(_WIN32)
#define SM_API __declspec(dllexport)
#else
#define SM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_status {
  SM_OK = 0,
  SM_ERR_INVALID_INPUT = 1,
  SM_ERR_NOT_FOUND = 2,
  SM_ERR_IO = 3,
  SM_ERR_SCHEMA = 4,
  SM_ERR_NOT_READY = 5,
  SM_ERR_INVALID_CONFIG = 6,
  SM_ERR_MISSING_VOCABULARY = 7,
  SM_ERR_INTERNAL = 8
} sm_status;

typedef struct sm_model sm_model;

/* Library version string, static storage. */
SM_API const char* sm_version(void);

/* Message of the last failure on the calling thread; empty when none. */
SM_API const char* sm_last_error(void);

/* Stable name of a status code. */
SM_API const char* sm_status_name(sm_status status);

/* Number of model inputs and the name of input `index`. */
SM_API size_t sm_feature_count(void);
SM_API const char* sm_feature_name(size_t index);

/* Gini coefficient of follower counts. `degenerate` (optional) is set to 1
   when every count is zero. */
SM_API sm_status sm_gini(const double* counts, size_t n, double* out, int* degenerate);

SM_API sm_status sm_model_load(const char* path, sm_model** out);
SM_API sm_status sm_model_save(const sm_model* model, const char* path);
SM_API void sm_model_free(sm_model* model);

/* `features` holds sm_feature_count() raw values; NaN marks missing. */
SM_API sm_status sm_model_predict(const sm_model* model, const double* features, size_t n,
                                  double* out);
/* Writes n attributions into `phi` and the base value into `base`. */
SM_API sm_status sm_model_shap(const sm_model* model, const double* features, size_t n,
                               double* phi, double* base);

/* Commands take a JSON object and return a JSON summary in `*out`, to be
   released with sm_string_free. */
SM_API sm_status sm_train(const char* config_json, char** out);
SM_API sm_status sm_recommend(const char* config_json, char** out);
SM_API sm_status sm_simulate(const char* config_json, char** out);
SM_API sm_status sm_report(const char* config_json, char** out);
SM_API void sm_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SOCIALMUSE_H */

/*
Copyright 2026 The auxvi Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

/*
 * C interface to the auxvi experiment runner.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every fallible call returns an auxvi_status; on failure a description is
 * available from auxvi_last_error() until the next call on the same thread.
 */

#ifndef AUXVI_AUXVI_H
#define AUXVI_AUXVI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AUXVI_API __declspec(dllexport)
#else
#define AUXVI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum auxvi_status {
  AUXVI_OK = 0,
  AUXVI_ERR_INVALID_ARGUMENT = 1, /* null handle, unknown field name */
  AUXVI_ERR_CONFIG = 2,           /* config failed to parse or validate */
  AUXVI_ERR_CHECKPOINT = 3,       /* checkpoint unreadable or corrupted */
  AUXVI_ERR_NUMERICAL = 4,        /* non-finite value during training */
  AUXVI_ERR_IO = 5,
  AUXVI_ERR_INTERNAL = 6
} auxvi_status;

typedef struct auxvi_config auxvi_config;
typedef struct auxvi_summary auxvi_summary;
typedef struct auxvi_report auxvi_report;

AUXVI_API const char* auxvi_version(void);
AUXVI_API const char* auxvi_last_error(void);

/* Config ---------------------------------------------------------------- */

AUXVI_API auxvi_status auxvi_config_load(const char* path, auxvi_config** out);
AUXVI_API auxvi_status auxvi_config_parse(const char* text, auxvi_config** out);
/* Overrides one "section.key" field, e.g. "train.seed", "output.dir". */
AUXVI_API auxvi_status auxvi_config_set(auxvi_config* cfg, const char* key,
                                        const char* value);
/* Canonical text form; valid until the config is modified or freed. */
AUXVI_API const char* auxvi_config_text(auxvi_config* cfg);
AUXVI_API void auxvi_config_free(auxvi_config* cfg);

/* Run ------------------------------------------------------------------- */

/*
 * Trains, certifies and writes artifacts. A numerical abort during training
 * still produces a summary (with the partial trace on disk) and returns
 * AUXVI_ERR_NUMERICAL.
 */
AUXVI_API auxvi_status auxvi_run(const auxvi_config* cfg, auxvi_summary** out);

/*
 * Numeric summary fields: "elbo_mc", "elbo_std_error", "log_evidence",
 * "elbo_theta", "elbo_theta_phi", "kl_gap", "equivalence_discrepancy",
 * "dip", "dip_p_value", "wall_ms", "steps_completed", "certified",
 * "chain_holds", "train_ok". Fields that do not apply to the run return
 * AUXVI_ERR_INVALID_ARGUMENT.
 */
AUXVI_API auxvi_status auxvi_summary_get(const auxvi_summary* s,
                                         const char* field, double* out);
/* JSON text of the summary; owned by the handle. */
AUXVI_API const char* auxvi_summary_json(const auxvi_summary* s);
AUXVI_API void auxvi_summary_free(auxvi_summary* s);

/* Verify ---------------------------------------------------------------- */

AUXVI_API auxvi_status auxvi_verify(const char* checkpoint_path,
                                    auxvi_report** out);
/* 1 when every oracle quantity could be computed. */
AUXVI_API int auxvi_report_certified(const auxvi_report* r);
/* 1 when log P(x) >= L(theta) >= L(theta, phi) within 1e-6. */
AUXVI_API int auxvi_report_chain_holds(const auxvi_report* r);
AUXVI_API auxvi_status auxvi_report_get(const auxvi_report* r,
                                        const char* field, double* out);
AUXVI_API const char* auxvi_report_text(const auxvi_report* r);
AUXVI_API void auxvi_report_free(auxvi_report* r);

/* Selftest -------------------------------------------------------------- */

typedef void (*auxvi_selftest_callback)(const char* name, int passed,
                                        const char* detail, void* user);

/* Runs the invariant suite, reporting each check; *failures receives the
 * number of failed checks. */
AUXVI_API auxvi_status auxvi_selftest(auxvi_selftest_callback cb, void* user,
                                      int* failures);

#ifdef __cplusplus
}
#endif

#endif /* AUXVI_AUXVI_H */

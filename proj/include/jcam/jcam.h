/* SPDX-License-Identifier: Apache-2.0
 *
 * C API for the joint communication and proactive monitoring (JCAM)
 * simulation engine.  All entry points return a jcam_status; on failure a
 * thread-local message is available via jcam_last_error().  Strings
 * returned through out-parameters are heap-allocated and must be released
 * with jcam_string_free().
 */

#ifndef JCAM_H
#define JCAM_H

#include <stdint.h>

#if defined(_WIN32)
#define JCAM_API __declspec(dllexport)
#else
#define JCAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jcam_status {
    JCAM_OK = 0,
    JCAM_ERR_INVALID_ARGUMENT = 1,
    JCAM_ERR_PARSE = 2,
    JCAM_ERR_IO = 3,
    JCAM_ERR_UNSUPPORTED = 4,
    JCAM_ERR_INTERNAL = 5
} jcam_status;

JCAM_API const char* jcam_version(void);
JCAM_API const char* jcam_status_name(jcam_status s);

/* Message for the most recent failure on this thread; empty string when the
 * last call succeeded.  The pointer stays valid until the next API call on
 * the same thread. */
JCAM_API const char* jcam_last_error(void);

JCAM_API void jcam_string_free(char* s);

/* Opaque parsed experiment description (base system parameters, strategy
 * list, optional sweep). */
typedef struct jcam_experiment jcam_experiment;

JCAM_API jcam_status jcam_experiment_parse_file(const char* path, jcam_experiment** out);

/* name labels diagnostics ("<buffer>" is used when name is NULL). */
JCAM_API jcam_status jcam_experiment_parse_text(const char* text, const char* name,
                                                jcam_experiment** out);

JCAM_API void jcam_experiment_free(jcam_experiment* e);

/* Replaces the master seed from the config file. */
JCAM_API jcam_status jcam_experiment_set_seed(jcam_experiment* e, uint64_t seed);

/* One drop, every requested strategy.  csv_out receives the result table
 * (header strategy,seed,sweep_var,sweep_val,min_se,min_msp,iterations,
 * candidate_evaluations,runtime_ms); summary_out a human-readable digest.
 * Either out-pointer may be NULL.  timing != 0 fills runtime_ms with
 * wall-clock measurements (reruns are then no longer byte-identical). */
JCAM_API jcam_status jcam_run_single(const jcam_experiment* e, int timing, char** csv_out,
                                     char** summary_out);

/* Full sweep: one CSV row per (sweep value, drop, strategy), drops spread
 * over jobs worker threads with deterministic per-drop seeds. */
JCAM_API jcam_status jcam_run_sweep(const jcam_experiment* e, int jobs, int timing, char** csv_out,
                                    char** summary_out);

/* Monte Carlo verification of the closed-form expressions.  csv_out
 * receives rows term,closed_form,empirical,rel_error,std_error,pass;
 * mandatory_pass_out (may be NULL) is set to 1 when every mandatory row
 * passed tol, else 0.  Rows whose name starts with "disc." are
 * report-only. */
JCAM_API jcam_status jcam_run_verify(const jcam_experiment* e, long long trials, double tol,
                                     int jobs, char** csv_out, char** summary_out,
                                     int* mandatory_pass_out);

/* Plain-text dump of drop 0's node layout and large-scale state. */
JCAM_API jcam_status jcam_scenario_dump(const jcam_experiment* e, char** text_out);

#ifdef __cplusplus
}
#endif

#endif /* JCAM_H */

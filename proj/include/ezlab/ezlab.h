#ifndef EZLAB_EZLAB_H
#define EZLAB_EZLAB_H

/* C interface to the ezlab core. Every object is an opaque handle owned by the
 * caller and released with its *_free function; *_free accepts NULL. Every
 * function that can fail returns an ezl_status; on failure ezl_last_error()
 * describes the most recent error of the calling thread and the output
 * arguments are left untouched. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EZL_API __declspec(dllexport)
#else
#define EZL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ezl_status {
  EZL_OK = 0,
  EZL_INVALID_ARGUMENT = 1,
  EZL_CONTAINS_ORIGIN = 2,
  EZL_NON_FINITE = 3,
  EZL_NON_MONOTONE_WEIGHT = 4,
  EZL_ZERO_REAL_PART = 5,
  EZL_OVERLAP = 6,
  EZL_EMPTY_CLUSTER = 7,
  EZL_COVERAGE = 8,
  EZL_NON_CONVERGED = 9,
  EZL_PARSE = 10,
  EZL_IO = 11,
  EZL_CONFIG = 12,
  EZL_INTERNAL = 13
} ezl_status;

typedef enum ezl_eval_status {
  EZL_EVAL_CONVERGED = 0,
  EZL_EVAL_NON_CONVERGED = 1,
  EZL_EVAL_AT_ZERO = 2
} ezl_eval_status;

typedef struct ezl_zeroset ezl_zeroset;
typedef struct ezl_weight ezl_weight;
typedef struct ezl_evaluator ezl_evaluator;
typedef struct ezl_config ezl_config;
typedef struct ezl_report ezl_report;

/* value is -inf when status is EZL_EVAL_AT_ZERO. */
typedef struct ezl_eval_result {
  double value;
  double truncation_radius;
  double tail_estimate;
  ezl_eval_status status;
} ezl_eval_result;

EZL_API const char* ezl_version(void);
EZL_API const char* ezl_status_name(ezl_status status);
/* Valid until the next failing call on the same thread. */
EZL_API const char* ezl_last_error(void);
/* Releases strings returned through char** outputs. */
EZL_API void ezl_string_free(char* s);

EZL_API ezl_status ezl_zeroset_from_points(const double* re, const double* im, size_t n,
                                           ezl_zeroset** out);
/* CSV with a "re,im" header or a JSON array of [re, im] pairs. */
EZL_API ezl_status ezl_zeroset_load(const char* path, ezl_zeroset** out);
EZL_API ezl_status ezl_zeroset_integer_lattice(size_t n, ezl_zeroset** out);
EZL_API ezl_status ezl_zeroset_one_sided(size_t n, ezl_zeroset** out);
EZL_API ezl_status ezl_zeroset_perturbed_lattice(size_t n, const ezl_weight* band, double m0,
                                                 uint64_t seed, ezl_zeroset** out);
EZL_API size_t ezl_zeroset_size(const ezl_zeroset* zs);
/* Zeros are ordered by nondecreasing modulus. */
EZL_API ezl_status ezl_zeroset_get(const ezl_zeroset* zs, size_t index, double* re, double* im);
EZL_API void ezl_zeroset_free(ezl_zeroset* zs);

/* family: "log" (param c), "power" (p) or "exp_sqrt_log" (q). */
EZL_API ezl_status ezl_weight_create(const char* family, double param, ezl_weight** out);
EZL_API ezl_status ezl_weight_eval(const ezl_weight* w, double t, double* out);
EZL_API void ezl_weight_free(ezl_weight* w);

/* variant: "plain", "projected" or "half_projected"; the projected variants
 * need a weight and m0 > 0 to split off the near-real part. The zero set is
 * copied. */
EZL_API ezl_status ezl_evaluator_create(const ezl_zeroset* zs, const char* variant,
                                        const ezl_weight* w, double m0, double tol,
                                        ezl_evaluator** out);
EZL_API ezl_status ezl_evaluator_at(const ezl_evaluator* ev, double re, double im,
                                    ezl_eval_result* out);
EZL_API void ezl_evaluator_free(ezl_evaluator* ev);

EZL_API ezl_status ezl_config_parse(const char* text, ezl_config** out);
EZL_API ezl_status ezl_config_load(const char* path, ezl_config** out);
EZL_API ezl_status ezl_config_set(ezl_config* cfg, const char* key, const char* value);
/* EZL_CONFIG when the key is not set. */
EZL_API ezl_status ezl_config_get(const ezl_config* cfg, const char* key, char** out);
EZL_API void ezl_config_free(ezl_config* cfg);

/* command: "gen", "eval", "sd-fit", "stats" or "experiment". */
EZL_API ezl_status ezl_run(const char* command, const ezl_config* cfg, ezl_report** out);
EZL_API ezl_status ezl_report_json(const ezl_report* r, char** out);
/* 1 when the verdict is pass, 0 otherwise. */
EZL_API int ezl_report_passed(const ezl_report* r);
EZL_API ezl_status ezl_report_write(const ezl_report* r, const char* dir);
EZL_API void ezl_report_free(ezl_report* r);

#ifdef __cplusplus
}
#endif

#endif /* EZLAB_EZLAB_H */

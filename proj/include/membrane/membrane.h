/* C interface of the membrane library: opaque handles and status codes.
   Strings returned through char** are owned by the caller and released with mbr_string_free. */
#ifndef MEMBRANE_MEMBRANE_H
#define MEMBRANE_MEMBRANE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(MBR_BUILDING_LIBRARY)
#define MBR_API __attribute__((visibility("default")))
#else
#define MBR_API
#endif

typedef enum mbr_status {
  MBR_OK = 0,
  MBR_INVALID_INPUT = 1,
  MBR_NONPARABOLIC_COEFFICIENT = 2,
  MBR_DEGENERATE_WENTZELL = 3,
  MBR_ATOM_ON_MEMBRANE = 4,
  MBR_TIME_ORDER = 5,
  MBR_CONVERGENCE_FAILURE = 6,
  MBR_MESH_MISMATCH = 7,
  MBR_MESH_TOO_COARSE = 8,
  MBR_SINGULAR_INTEGRAND = 9,
  MBR_SERIES_DIVERGENCE = 10,
  MBR_MEASURE_NOT_NULL = 11,
  MBR_STEP_TOO_LARGE = 12,
  MBR_IO = 13,
  MBR_NULL_ARGUMENT = 100,
  MBR_INTERNAL = 101
} mbr_status;

typedef struct mbr_config mbr_config;
typedef struct mbr_problem mbr_problem;
typedef struct mbr_function mbr_function;
typedef struct mbr_semigroup mbr_semigroup;

MBR_API const char* mbr_version(void);
MBR_API const char* mbr_status_name(mbr_status status);
/* Message of the last failing call on the calling thread; "" if none. */
MBR_API const char* mbr_last_error(void);
MBR_API void mbr_string_free(char* s);
/* Caps worker threads; n <= 0 restores the hardware default. */
MBR_API void mbr_set_threads(int n);

/* Run configurations (problem, phi, solve/check/mc parameters). */
MBR_API mbr_status mbr_config_load(const char* path, mbr_config** out);
MBR_API mbr_status mbr_config_parse(const char* json, const char* base_dir, mbr_config** out);
MBR_API void mbr_config_free(mbr_config* config);
MBR_API mbr_status mbr_config_set_seed(mbr_config* config, uint64_t seed);
MBR_API mbr_status mbr_config_set_paths(mbr_config* config, size_t paths);

/* Commands. Reports are JSON documents; *pass is 1 when every check passed. */
MBR_API mbr_status mbr_solve_csv(const mbr_config* config, char** csv);
MBR_API mbr_status mbr_check(const mbr_config* config, const char* suite, char** report, int* pass);
MBR_API mbr_status mbr_compare_mc(const mbr_config* config, char** report, int* pass);
MBR_API mbr_status mbr_validate(const mbr_config* config, char** report, int* pass);
MBR_API mbr_status mbr_dump_kernels(const mbr_config* config, char** json);

/* Problems, terminal functions and the semigroup. */
MBR_API mbr_status mbr_problem_parse(const char* json, mbr_problem** out);
MBR_API void mbr_problem_free(mbr_problem* problem);
MBR_API mbr_status mbr_function_parse(const char* json, mbr_function** out);
MBR_API void mbr_function_free(mbr_function* f);
MBR_API mbr_status mbr_function_eval(const mbr_function* f, double x, double* out);
MBR_API mbr_status mbr_semigroup_create(const mbr_problem* problem, mbr_semigroup** out);
MBR_API void mbr_semigroup_free(mbr_semigroup* op);
/* T_st phi(x) */
MBR_API mbr_status mbr_semigroup_value(const mbr_semigroup* op, double s, double x, double t, const mbr_function* phi,
                                       double* out);
MBR_API mbr_status mbr_semigroup_apply(const mbr_semigroup* op, double s, double t, const mbr_function* phi,
                                       const double* xs, size_t n, double* out);

/* Skew Brownian motion transition density, membrane at 0. */
MBR_API mbr_status mbr_skew_density(double alpha, double sigma, double dt, double x, double y, double* out);

#ifdef __cplusplus
}
#endif

#endif

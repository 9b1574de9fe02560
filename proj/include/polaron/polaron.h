#ifndef POLARON_POLARON_H
#define POLARON_POLARON_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PL_API __declspec(dllexport)
#else
#define PL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_VALIDATION = 1,
  PL_ERR_NUMERIC = 2,
  PL_VIOLATION = 3,
  PL_ERR_INTERNAL = 4
} pl_status;

typedef struct pl_context pl_context;
typedef struct pl_kernel pl_kernel;
typedef struct pl_potential pl_potential;

PL_API const char* pl_version(void);

PL_API pl_status pl_context_create(pl_context** out);
PL_API void pl_context_destroy(pl_context* ctx);
/* Message of the last failed call on this context; empty after a success. Owned by the context. */
PL_API const char* pl_last_error(const pl_context* ctx);

/* Runs a named command ("kernel.eval", "kernel.validate", "sample", "scan", "spectral", "gaussref",
   "check-inequalities", "free-energy", "report") with a JSON request. On PL_OK and PL_VIOLATION
   *response_json receives a JSON document to be released with pl_free_string. */
PL_API pl_status pl_run_command(pl_context* ctx, const char* command, const char* request_json,
                                char** response_json);
PL_API void pl_free_string(char* s);

/* kernel_json: the "kernel" block of a run config. */
PL_API pl_status pl_kernel_create(pl_context* ctx, const char* kernel_json, int dimension, pl_kernel** out);
PL_API pl_status pl_kernel_eval(pl_context* ctx, const pl_kernel* kernel, double r, double t, double* value);
PL_API void pl_kernel_destroy(pl_kernel* kernel);

PL_API pl_status pl_potential_well(pl_context* ctx, double radius, pl_potential** out);
PL_API pl_status pl_potential_eval(pl_context* ctx, const pl_potential* potential, const double* x, size_t d,
                                   double* value);
PL_API void pl_potential_destroy(pl_potential* potential);

/* Zero-energy binding threshold of the potential in d = 3 (unit mass). */
PL_API pl_status pl_well_threshold(pl_context* ctx, const pl_potential* potential, double* value);

#ifdef __cplusplus
}
#endif

#endif

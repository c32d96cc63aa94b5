/* C interface to the tbell library. All functions return a tbell_status;
 * on failure tbell_last_error() describes the most recent error on the
 * calling thread. Handles are opaque and must be released with the matching
 * *_free function. Strings returned through `const char**` stay valid until
 * the owning handle is freed or the next call on it. */
#ifndef TBELL_H
#define TBELL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TBELL_API __declspec(dllexport)
#else
#define TBELL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tbell_status {
    TBELL_OK = 0,
    TBELL_ERR_INVALID_ARGUMENT = 1,
    TBELL_ERR_PARSE = 2,
    TBELL_ERR_IO = 3,
    TBELL_ERR_UNDEFINED = 4,
    TBELL_ERR_INTERNAL = 5,
    TBELL_ERR_NULL_HANDLE = 6
} tbell_status;

typedef enum tbell_command {
    TBELL_PREDICT = 0,
    TBELL_SIMULATE = 1,
    TBELL_OPTIMIZE = 2,
    TBELL_VERIFY = 3
} tbell_command;

/* Settings are 0 = a, 1 = b, 2 = c; outcomes are +1 or -1. */

typedef struct tbell_config tbell_config;
typedef struct tbell_result tbell_result;
typedef struct tbell_ensemble tbell_ensemble;

TBELL_API const char* tbell_version(void);
TBELL_API const char* tbell_last_error(void);
TBELL_API const char* tbell_status_string(tbell_status status);

TBELL_API tbell_status tbell_config_new(tbell_config** out);
TBELL_API tbell_status tbell_config_parse(const char* text, tbell_config** out);
TBELL_API tbell_status tbell_config_load(const char* path, tbell_config** out);
/* Overrides one key; the whole configuration is re-validated. */
TBELL_API tbell_status tbell_config_set(tbell_config* config, const char* key, const char* value);
/* Overrides several keys at once and validates the result once, so related
 * keys (the three components of a direction) can change together. */
TBELL_API tbell_status tbell_config_update(tbell_config* config, const char* const* keys,
                                           const char* const* values, size_t count);
TBELL_API tbell_status tbell_config_serialize(tbell_config* config, const char** text);
TBELL_API tbell_status tbell_config_digest(tbell_config* config, const char** digest);
TBELL_API void tbell_config_free(tbell_config* config);

/* Runs a command. `flags` is reserved for debug options (see
 * TBELL_VERIFY_FAULT_REPEATED_TERM) and must be 0 otherwise. */
#define TBELL_VERIFY_FAULT_REPEATED_TERM 0x1u
TBELL_API tbell_status tbell_run(const tbell_config* config, tbell_command command,
                                 uint32_t flags, tbell_result** out);
TBELL_API tbell_status tbell_result_text(const tbell_result* result, const char** text);
/* 1 when the command succeeded (verify: all checks passed). */
TBELL_API tbell_status tbell_result_ok(const tbell_result* result, int* ok);
TBELL_API tbell_status tbell_result_item_count(const tbell_result* result, size_t* count);
TBELL_API tbell_status tbell_result_item(const tbell_result* result, size_t index,
                                         const char** name, int* passed);
TBELL_API void tbell_result_free(tbell_result* result);

TBELL_API tbell_status tbell_ensemble_run(const tbell_config* config, tbell_ensemble** out);
TBELL_API tbell_status tbell_ensemble_total(const tbell_ensemble* ensemble, uint64_t* runs);
TBELL_API tbell_status tbell_ensemble_count(const tbell_ensemble* ensemble, int x, int sx, int y,
                                            int sy, uint64_t* count);
/* TBELL_ERR_UNDEFINED when no run measured the pair. */
TBELL_API tbell_status tbell_ensemble_pair_prob(const tbell_ensemble* ensemble, int x, int sx,
                                                int y, int sy, double* estimate,
                                                double* std_error);
TBELL_API tbell_status tbell_ensemble_expectation(const tbell_ensemble* ensemble, int x, int y,
                                                  double* estimate, double* std_error);
TBELL_API void tbell_ensemble_free(tbell_ensemble* ensemble);

/* Closed forms. Direction arrays are 3 doubles of unit norm. */
TBELL_API tbell_status tbell_lhs16(const double a[3], const double b[3], const double c[3],
                                   double* value);
TBELL_API tbell_status tbell_lhs18(const double a[3], const double b[3], const double c[3],
                                   double* value);
/* State s|e+> + sqrt(1-s^2) e^{i phi}|e->, measured along x then y. */
TBELL_API tbell_status tbell_quantum_pair_prob(double s, double phi, const double e[3],
                                               const double x[3], int sx, const double y[3],
                                               int sy, double* value);

#ifdef __cplusplus
}
#endif

#endif /* TBELL_H */

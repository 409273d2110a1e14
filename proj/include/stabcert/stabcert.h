/* C interface to the stabcert library. All handles are opaque and owned by
 * the caller once returned; release them with the matching *_free. Functions
 * returning stab_status_t record a message retrievable with
 * stab_last_error_message() on the calling thread. */
#ifndef STABCERT_STABCERT_H
#define STABCERT_STABCERT_H

#include <stddef.h>

#if defined(_WIN32)
#define STAB_API __declspec(dllexport)
#else
#define STAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  STAB_OK = 0,
  STAB_E_INVALID_ARGUMENT = 1,
  STAB_E_DOMAIN_MISMATCH = 2,
  STAB_E_NUMERICAL = 3,
  STAB_E_RESOLUTION = 4,
  STAB_E_ALREADY_STABLE = 5,
  STAB_E_SINGULAR_GRAM = 6,
  STAB_E_INSTABILITY = 7,
  STAB_E_IO = 8,
  STAB_E_UNVERIFIABLE = 9,
  STAB_E_INTERNAL = 100
} stab_status_t;

typedef struct stab_domain stab_domain_t;
typedef struct stab_set stab_set_t;
typedef struct stab_decomposition stab_decomposition_t;
typedef struct stab_certificate stab_certificate_t;
typedef struct stab_result stab_result_t;

STAB_API const char* stab_version(void);
STAB_API const char* stab_last_error_message(void);

/* Grids. */
STAB_API stab_status_t stab_domain_create(int dim, double half_width,
                                          int points_per_axis, int periodic,
                                          stab_domain_t** out);
STAB_API size_t stab_domain_size(const stab_domain_t* d);
STAB_API void stab_domain_free(stab_domain_t* d);

/* Sets from a shape string such as "slabs:period=1,fill=0.25". */
STAB_API stab_status_t stab_set_create(const stab_domain_t* d,
                                       const char* shape, stab_set_t** out);
STAB_API double stab_set_measure(const stab_set_t* e);
STAB_API void stab_set_free(stab_set_t* e);

/* Operators from JSON such as {"kind":"frac","s":1,"c":0}. */
STAB_API stab_status_t stab_decomposition_create(const stab_domain_t* d,
                                                 const char* operator_json,
                                                 stab_decomposition_t** out);
STAB_API size_t stab_decomposition_size(const stab_decomposition_t* dec);
STAB_API double stab_decomposition_eigenvalue(const stab_decomposition_t* dec,
                                              size_t j);
STAB_API stab_status_t stab_best_constant(const stab_decomposition_t* dec,
                                          const stab_set_t* e, double k,
                                          double* out);
STAB_API void stab_decomposition_free(stab_decomposition_t* dec);

/* Certificates from hypothesis constants. */
STAB_API stab_status_t stab_certificate_build(double c1, double a, double c2,
                                              double b, double M,
                                              double delta0,
                                              stab_certificate_t** out);
STAB_API double stab_certificate_T(const stab_certificate_t* c);
STAB_API double stab_certificate_alpha(const stab_certificate_t* c);
STAB_API double stab_certificate_log_C(const stab_certificate_t* c);
/* Full constant set as a JSON object; owned by the handle. */
STAB_API const char* stab_certificate_json(const stab_certificate_t* c);
STAB_API void stab_certificate_free(stab_certificate_t* c);

/* Commands: check-thick, spectral-constant, certify, feedback-build,
 * simulate, probe. A usage error still yields a result document with exit
 * class 2; STAB_OK is returned whenever a document was produced. */
STAB_API stab_status_t stab_run(const char* command, const char* config_json,
                                stab_result_t** out);
STAB_API const char* stab_result_json(const stab_result_t* r);
STAB_API int stab_result_exit_class(const stab_result_t* r);
STAB_API size_t stab_result_side_file_count(const stab_result_t* r);
STAB_API const char* stab_result_side_file_name(const stab_result_t* r,
                                                size_t i);
STAB_API const char* stab_result_side_file_contents(const stab_result_t* r,
                                                    size_t i);
STAB_API void stab_result_free(stab_result_t* r);

/* Writes through a temporary sibling file and a rename. */
STAB_API stab_status_t stab_write_file_atomic(const char* path,
                                              const char* contents);
/* Reads a whole file; free the buffer with stab_string_free. */
STAB_API stab_status_t stab_read_file(const char* path, char** out);
STAB_API void stab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

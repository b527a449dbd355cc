/* C interface to the radial cavitation solver (libcavity). All handles are
 * opaque. Every function returns a cav_status; on failure a message is
 * available from cav_last_error() on the calling thread. Strings returned
 * through char** are heap allocated and released with cav_string_free. */
#ifndef CAVITY_CAVITY_H
#define CAVITY_CAVITY_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define CAV_API __attribute__((visibility("default")))
#else
#define CAV_API
#endif

typedef enum cav_status {
  CAV_OK = 0,
  CAV_ERR_INVALID_ARGUMENT = 1,
  CAV_ERR_CONFIG = 2,
  CAV_ERR_IO = 3,
  CAV_ERR_DOMAIN = 4,
  CAV_ERR_SOLVER = 5,
  CAV_ERR_NOT_CONVERGED = 6,
  CAV_ERR_AMBIGUOUS = 7,
  CAV_ERR_INTERNAL = 8
} cav_status;

typedef struct cav_config cav_config;
typedef struct cav_solution cav_solution;
typedef struct cav_table cav_table;

typedef struct cav_record {
  double lambda;
  double rho0;
  double cavity;
  double energy;
  double nu;
  double wall_time_s;
  int converged;
  char status[32];
  char method[16];
} cav_record;

CAV_API const char* cav_last_error(void);
CAV_API const char* cav_status_name(cav_status status);
CAV_API const char* cav_version(void);
CAV_API void cav_string_free(char* s);

/* Configuration: reference defaults, JSON text or a JSON file. Keys are
 * dotted paths such as "solver.lambda" or "density.rho0". */
CAV_API cav_status cav_config_default(cav_config** out);
CAV_API cav_status cav_config_from_json(const char* text, cav_config** out);
CAV_API cav_status cav_config_from_file(const char* path, cav_config** out);
CAV_API cav_status cav_config_set_number(cav_config* cfg, const char* key, double value);
CAV_API cav_status cav_config_set_string(cav_config* cfg, const char* key, const char* value);
CAV_API cav_status cav_config_set_bool(cav_config* cfg, const char* key, int value);
CAV_API cav_status cav_config_get_number(const cav_config* cfg, const char* key, double* out);
/* Copies a string value into buf (always NUL terminated when size > 0). */
CAV_API cav_status cav_config_get_string(const cav_config* cfg, const char* key, char* buf,
                                         size_t size);
CAV_API cav_status cav_config_to_json(const cav_config* cfg, char** out);
CAV_API void cav_config_free(cav_config* cfg);

/* Single solve. A solve that ran but did not converge still returns a
 * handle and CAV_ERR_NOT_CONVERGED so that diagnostics can be read. */
CAV_API cav_status cav_solve(const cav_config* cfg, cav_solution** out);
CAV_API cav_status cav_solution_record(const cav_solution* sol, cav_record* out);
CAV_API cav_status cav_solution_report(const cav_solution* sol, char** json_out);
CAV_API size_t cav_solution_size(const cav_solution* sol);
CAV_API cav_status cav_solution_field(const cav_solution* sol, double* R, double* r, size_t n);
CAV_API cav_status cav_solution_write_outputs(const cav_solution* sol, const char* dir);
CAV_API void cav_solution_free(cav_solution* sol);

/* (λ, ρ0) sweep from the config's sweep section. */
CAV_API cav_status cav_sweep(const cav_config* cfg, cav_table** out);
CAV_API size_t cav_table_size(const cav_table* table);
CAV_API cav_status cav_table_record(const cav_table* table, size_t index, cav_record* out);
CAV_API cav_status cav_table_emit(const cav_table* table, const char* dir);
CAV_API void cav_table_free(cav_table* table);

/* Report-style commands; the report is a JSON document. */
CAV_API cav_status cav_critical(const cav_config* cfg, char** json_out);
CAV_API cav_status cav_free_boundary(const cav_config* cfg, char** json_out);
CAV_API cav_status cav_validate(const cav_config* cfg, char** json_out);
CAV_API cav_status cav_oracle(const cav_config* cfg, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* CAVITY_CAVITY_H */

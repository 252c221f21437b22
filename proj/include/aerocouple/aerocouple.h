/* C interface to the aerocouple engine.
 *
 * Every call returns an ac_status; on failure the message is available from
 * ac_last_error() on the calling thread until the next failing call.
 * Objects are opaque and released with the matching *_free function
 * (passing NULL is allowed). Text outputs use the caller-buffer convention:
 * the required size including the terminator is stored in *needed, and the
 * text is copied (truncated if necessary) when capacity > 0. */
#ifndef AEROCOUPLE_H
#define AEROCOUPLE_H

#include <stddef.h>

#if defined(AEROCOUPLE_BUILDING_LIBRARY)
#define AC_API __attribute__((visibility("default")))
#else
#define AC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ac_status {
  AC_OK = 0,
  AC_ERR_PARSE = 1,
  AC_ERR_VALIDATION = 2,
  AC_ERR_CONVERGENCE = 3,
  AC_ERR_IO = 4,
  AC_ERR_NUMERIC = 5,
  AC_ERR_INVALID_ARGUMENT = 6,
  AC_ERR_INTERNAL = 7
} ac_status;

typedef enum ac_log_level { AC_LOG_DEBUG = 0, AC_LOG_INFO = 1, AC_LOG_WARNING = 2 } ac_log_level;

typedef struct ac_model ac_model;
typedef struct ac_config ac_config;
typedef struct ac_simulation ac_simulation;
typedef struct ac_result ac_result;
typedef struct ac_sweep ac_sweep;
typedef struct ac_table ac_table;

typedef void (*ac_log_fn)(ac_log_level level, const char* message, void* user);

AC_API const char* ac_version(void);
AC_API const char* ac_last_error(void);
/* Line and column of the last parse error, 0 when not applicable. */
AC_API void ac_last_error_location(int* line, int* column);
/* NULL restores the default sink (warnings to stderr). */
AC_API void ac_set_log_callback(ac_log_fn fn, void* user);
/* Drops every message below `level`; AC_LOG_WARNING + 1 silences everything. */
AC_API void ac_set_log_threshold(int level);

/* Structural model */
AC_API ac_status ac_model_load(const char* path, ac_model** out);
AC_API ac_status ac_model_parse(const char* text, ac_model** out);
AC_API ac_status ac_model_info(const ac_model* model, int* num_modes, int* num_nodes);
AC_API ac_status ac_model_serialize(const ac_model* model, char* buffer, size_t capacity, size_t* needed);
AC_API void ac_model_free(ac_model* model);

/* Coupling configuration */
AC_API ac_status ac_config_load(const char* path, ac_config** out);
AC_API ac_status ac_config_parse(const char* text, ac_config** out);
AC_API ac_status ac_config_set(ac_config* config, const char* key, const char* value);
AC_API void ac_config_free(ac_config* config);

/* Simulation: builds solvers and interface maps; degenerate interfaces fail here. */
AC_API ac_status ac_simulation_create(const ac_config* config, const ac_model* model, ac_simulation** out);
AC_API ac_status ac_simulation_check(const ac_simulation* sim, char* buffer, size_t capacity, size_t* needed);
AC_API ac_status ac_simulation_run(ac_simulation* sim, ac_result** out);
AC_API void ac_simulation_free(ac_simulation* sim);

/* Results */
AC_API ac_status ac_result_summary(const ac_result* result, char* buffer, size_t capacity, size_t* needed);
AC_API ac_status ac_result_write(const ac_result* result, const char* out_dir);
AC_API size_t ac_result_num_records(const ac_result* result);
AC_API int ac_result_num_modes(const ac_result* result);
/* Any of the output pointers may be NULL; arrays hold num_modes entries. */
AC_API ac_status ac_result_record(const ac_result* result, size_t index, double* time, double* q, double* qdot,
                                  double* force);
AC_API ac_status ac_result_monitor(const ac_result* result, const char* name, size_t index, double* value);
AC_API void ac_result_free(ac_result* result);

/* Parameter sweeps; threads <= 0 uses AEROCOUPLE_THREADS or the hardware concurrency. */
AC_API ac_status ac_sweep_run(const ac_config* config, const ac_model* model, const char* key, const double* values,
                              size_t count, int threads, ac_sweep** out);
AC_API ac_status ac_sweep_table(const ac_sweep* sweep, char* buffer, size_t capacity, size_t* needed);
AC_API ac_status ac_sweep_boundary(const ac_sweep* sweep, int* found, double* speed, double* lower, double* upper,
                                   char* report, size_t capacity, size_t* needed);
AC_API void ac_sweep_free(ac_sweep* sweep);

/* CSV tables (history, monitors) */
AC_API ac_status ac_table_load(const char* path, ac_table** out);
AC_API size_t ac_table_num_rows(const ac_table* table);
AC_API ac_status ac_table_column(const ac_table* table, const char* name, double* values, size_t capacity);
AC_API void ac_table_free(ac_table* table);

/* Postprocessing */
AC_API ac_status ac_transfer_function(const double* time, const double* input, const double* output, size_t count,
                                      double frequency_hz, double transient_cut, double* magnitude,
                                      double* phase_deg, int* ill_conditioned);
AC_API ac_status ac_modal_identification(const double* time, const double* signal, size_t count, int n_expected,
                                         double* frequency_hz, double* damping, size_t capacity, size_t* found);
AC_API ac_status ac_flutter_boundary(const double* speeds, const double* damping, size_t count, int* found,
                                     double* speed);

#ifdef __cplusplus
}
#endif

#endif /* AEROCOUPLE_H */

#ifndef DTAC_DTAC_H
#define DTAC_DTAC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define DTAC_API __declspec(dllexport)
#else
#define DTAC_API __attribute__((visibility("default")))
#endif

typedef enum dtac_status {
  DTAC_OK = 0,
  DTAC_ERR_CONFIG = 1,
  DTAC_ERR_ENGINE = 2,
  DTAC_ERR_NO_CERTIFIED_STEP = 3,
  DTAC_ERR_SELFTEST = 4,
  DTAC_ERR_INVALID_ARGUMENT = 5,
  DTAC_ERR_IO = 6,
  DTAC_ERR_INTERNAL = 7
} dtac_status;

typedef struct dtac_config dtac_config;
typedef struct dtac_run dtac_run;
typedef struct dtac_sweep dtac_sweep;
typedef struct dtac_compare dtac_compare;
typedef struct dtac_spectral dtac_spectral;
typedef struct dtac_selftest dtac_selftest;

typedef struct dtac_trace_row {
  long long iter;
  double optimality_gap;
  double mse;
  double consensus_error;
  double grad_tracker_sum_error;
  double mass_error;
} dtac_trace_row;

typedef struct dtac_sweep_entry {
  int tau_max;
  double alpha;
  const char* status; /* CONVERGED, DIVERGED or MAXITER; owned by the sweep */
  long long iters;
  double final_gap;
  double final_mse;
  const char* trace_file; /* empty when no output directory was given */
} dtac_sweep_entry;

/* Message of the last failed call on this thread ("" if none). */
DTAC_API const char* dtac_last_error(void);
DTAC_API const char* dtac_version(void);
DTAC_API void dtac_string_free(char* s);

/* --- configuration --- */
DTAC_API dtac_status dtac_config_new(dtac_config** out);
DTAC_API void dtac_config_free(dtac_config* cfg);
DTAC_API dtac_status dtac_config_load_file(dtac_config* cfg, const char* path);
DTAC_API dtac_status dtac_config_parse(dtac_config* cfg, const char* text);
DTAC_API dtac_status dtac_config_set(dtac_config* cfg, const char* key, const char* value);
/* "section.key=value" */
DTAC_API dtac_status dtac_config_set_assignment(dtac_config* cfg, const char* assignment);
DTAC_API dtac_status dtac_config_validate(const dtac_config* cfg);
/* Caller frees *out with dtac_string_free. */
DTAC_API dtac_status dtac_config_to_text(const dtac_config* cfg, char** out);
DTAC_API size_t dtac_config_key_count(void);
DTAC_API const char* dtac_config_key_name(size_t i);
DTAC_API const char* dtac_config_key_help(size_t i);
/* Formatted table of every key with its help text and default. */
DTAC_API const char* dtac_config_keys_help(void);

/* --- single run --- */
/* Runs at delay.tau_max and run.alpha. With a non-NULL out_dir the trace
   is written there as <tag>_tau<t>_alpha<a>.csv together with the delay
   list. A diverged run is a valid result. */
DTAC_API dtac_status dtac_run_execute(const dtac_config* cfg, const char* out_dir, dtac_run** out);
DTAC_API void dtac_run_free(dtac_run* r);
DTAC_API const char* dtac_run_status(const dtac_run* r);
DTAC_API const char* dtac_run_status_line(const dtac_run* r);
DTAC_API const char* dtac_run_trace_file(const dtac_run* r);
DTAC_API long long dtac_run_iterations(const dtac_run* r);
DTAC_API double dtac_run_final_gap(const dtac_run* r);
DTAC_API double dtac_run_final_mse(const dtac_run* r);
DTAC_API double dtac_run_max_mass_error(const dtac_run* r);
DTAC_API double dtac_run_max_tracker_error(const dtac_run* r);
DTAC_API size_t dtac_run_trace_length(const dtac_run* r);
DTAC_API dtac_status dtac_run_trace_row(const dtac_run* r, size_t i, dtac_trace_row* out);
/* Agent-averaged estimate; copies min(len, dim) entries, returns dim. */
DTAC_API size_t dtac_run_average_estimate(const dtac_run* r, double* buf, size_t len);

/* --- sweep --- */
DTAC_API dtac_status dtac_sweep_execute(const dtac_config* cfg, const char* out_dir, int jobs, dtac_sweep** out);
DTAC_API void dtac_sweep_free(dtac_sweep* s);
DTAC_API size_t dtac_sweep_count(const dtac_sweep* s);
DTAC_API dtac_status dtac_sweep_get(const dtac_sweep* s, size_t i, dtac_sweep_entry* out);
DTAC_API const char* dtac_sweep_summary_file(const dtac_sweep* s);

/* --- delayed engine against delay-free ADD-OPT --- */
DTAC_API dtac_status dtac_compare_execute(const dtac_config* cfg, const char* out_dir, dtac_compare** out);
DTAC_API void dtac_compare_free(dtac_compare* c);
/* which: 0 = configured engine under delays, 1 = ADD-OPT without delays */
DTAC_API const char* dtac_compare_status(const dtac_compare* c, int which);
DTAC_API long long dtac_compare_iterations(const dtac_compare* c, int which);
DTAC_API double dtac_compare_final_gap(const dtac_compare* c, int which);
/* First recorded iteration with gap below the threshold, -1 if never. */
DTAC_API long long dtac_compare_iterations_to_gap(const dtac_compare* c, int which, double gap);
DTAC_API const char* dtac_compare_file(const dtac_compare* c);

/* --- spectral analysis and step-size certificate --- */
/* delay_file may be NULL; otherwise it replaces the configured network. */
DTAC_API dtac_status dtac_spectral_analyze(const dtac_config* cfg, const char* delay_file, dtac_spectral** out);
DTAC_API void dtac_spectral_free(dtac_spectral* s);
DTAC_API int dtac_spectral_certified(const dtac_spectral* s);
DTAC_API double dtac_spectral_admissible_max(const dtac_spectral* s);
/* Numeric field by report key (e.g. "sigma", "rho_Cbar", "alpha3"). */
DTAC_API dtac_status dtac_spectral_value(const dtac_spectral* s, const char* key, double* out);
DTAC_API const char* dtac_spectral_text(const dtac_spectral* s);
DTAC_API const char* dtac_spectral_record(const dtac_spectral* s);
DTAC_API const char* dtac_spectral_error(const dtac_spectral* s);

/* rho(Cbar) <= rho(C)^(1/(1+tau)) on the configured network. */
DTAC_API dtac_status dtac_check_bound(const dtac_config* cfg, const char* delay_file, int* holds, double* rho_c,
                                      double* rho_cbar, double* bound);

/* --- self-test suites --- */
DTAC_API dtac_status dtac_selftest_run(double weight_perturbation, dtac_selftest** out);
DTAC_API void dtac_selftest_free(dtac_selftest* t);
DTAC_API size_t dtac_selftest_count(const dtac_selftest* t);
DTAC_API const char* dtac_selftest_name(const dtac_selftest* t, size_t i);
DTAC_API int dtac_selftest_passed(const dtac_selftest* t, size_t i);
DTAC_API const char* dtac_selftest_detail(const dtac_selftest* t, size_t i);
DTAC_API int dtac_selftest_all_passed(const dtac_selftest* t);

#ifdef __cplusplus
}
#endif

#endif

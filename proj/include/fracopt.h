/* C interface to the fracopt solver library.
 *
 * All objects are opaque handles created and destroyed by the library.
 * Functions return FRACOPT_OK on success; on failure the thread-local
 * message from fracopt_last_error() describes what went wrong.
 */
#ifndef FRACOPT_H
#define FRACOPT_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  FRACOPT_OK = 0,
  FRACOPT_ERR_GENERIC = 1,
  FRACOPT_ERR_VALIDATION = 2, /* bad config, parse error, missing input */
  FRACOPT_ERR_NUMERICAL = 3,  /* solver failure */
  FRACOPT_ERR_IO = 4
} fracopt_status;

typedef struct fracopt_config fracopt_config;
typedef struct fracopt_run fracopt_run;
typedef struct fracopt_report fracopt_report;

const char* fracopt_version(void);
const char* fracopt_last_error(void);

/* ---- configuration ---- */
fracopt_status fracopt_config_parse_file(const char* path, fracopt_config** out);
fracopt_status fracopt_config_parse_string(const char* text, fracopt_config** out);
/* Overrides applied after parsing: key as in the config schema
 * (e.g. "jobs", "enforce_grading", "vtk", "timing", "max_iterations"). */
fracopt_status fracopt_config_override(fracopt_config* cfg, const char* key, const char* value);
void fracopt_config_free(fracopt_config* cfg);

/* ---- running ---- */
/* Executes the adaptive loop and writes trace.csv, mesh and control dumps,
 * and manifest.txt into out_dir. */
fracopt_status fracopt_run_execute(const fracopt_config* cfg, const char* out_dir,
                                   fracopt_run** out);
void fracopt_run_free(fracopt_run* run);

int fracopt_run_iteration_count(const fracopt_run* run);
/* Column names follow the trace.csv header. */
fracopt_status fracopt_run_trace_value(const fracopt_run* run, int iteration, const char* column,
                                       double* out);

/* ---- reporting ---- */
/* Fits decay rates of a trace.csv over the trailing `window` iterations.
 * `passed` receives 1 when every fitted slope lies in the acceptance band. */
fracopt_status fracopt_report_csv(const char* trace_csv_path, int window, fracopt_report** out);
void fracopt_report_free(fracopt_report* rep);
const char* fracopt_report_text(const fracopt_report* rep);
int fracopt_report_passed(const fracopt_report* rep);
/* Fitted slope by contribution name ("total", "E_V", "E_P", "E_Z",
 * "E_Lambda"); fails when the slope is undefined for the trace. */
fracopt_status fracopt_report_slope(const fracopt_report* rep, const char* name, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FRACOPT_H */

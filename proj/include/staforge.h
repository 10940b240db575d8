/* sta-forge C API: run protocol-design requests through an opaque handle.
 *
 * Usage:
 *   stf_run* run = NULL;
 *   stf_status st = stf_run_request("{\"command\":\"spin\",...}", &run);
 *   if (st == STF_OK) { ... stf_run_report_json(run) ... }
 *   else              { ... stf_run_error_message(run) ... }
 *   stf_run_free(run);
 *
 * All returned strings are owned by the handle and live until stf_run_free.
 */
#ifndef STAFORGE_H
#define STAFORGE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stf_status {
  STF_OK = 0,
  STF_USAGE_ERROR = 2,   /* malformed request or invalid parameters */
  STF_NUMERIC_ERROR = 3  /* integrator/quadrature/optimizer failure */
} stf_status;

typedef struct stf_run stf_run;

const char* stf_version(void);

/* Executes a JSON request. *out_run always receives a handle (carrying either
 * results or an error message); it must be released with stf_run_free. */
stf_status stf_run_request(const char* request_json, stf_run** out_run);

stf_status stf_run_status(const stf_run* run);

/* JSON report; empty string when the run failed. */
const char* stf_run_report_json(const stf_run* run);

/* Trajectory (or sweep) CSV; empty string when the run failed. */
const char* stf_run_trajectory_csv(const stf_run* run);

/* Diagnostic message; empty string when the run succeeded. */
const char* stf_run_error_message(const stf_run* run);

void stf_run_free(stf_run* run);

#ifdef __cplusplus
}
#endif

#endif /* STAFORGE_H */

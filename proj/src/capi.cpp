#include "staforge.h"

#include <new>
#include <string>

#include "staforge/numerics.hpp"
#include "staforge/report.hpp"

struct stf_run {
  stf_status status = STF_OK;
  std::string report;
  std::string csv;
  std::string error;
};

extern "C" {

const char* stf_version(void) { return staforge::report::version(); }

stf_status stf_run_request(const char* request_json, stf_run** out_run) {
  if (out_run == nullptr) return STF_USAGE_ERROR;
  *out_run = nullptr;
  auto* run = new (std::nothrow) stf_run;
  if (run == nullptr) return STF_NUMERIC_ERROR;
  *out_run = run;
  if (request_json == nullptr) {
    run->status = STF_USAGE_ERROR;
    run->error = "request_json is null";
    return run->status;
  }
  try {
    staforge::report::RunOutcome outcome = staforge::report::runRequest(request_json);
    run->report = std::move(outcome.reportJson);
    run->csv = std::move(outcome.trajectoryCsv);
  } catch (const staforge::report::UsageError& e) {
    run->status = STF_USAGE_ERROR;
    run->error = e.what();
  } catch (const staforge::numerics::NumericsError& e) {
    run->status = STF_NUMERIC_ERROR;
    run->error = e.what();
  } catch (const std::exception& e) {
    run->status = STF_NUMERIC_ERROR;
    run->error = e.what();
  }
  return run->status;
}

stf_status stf_run_status(const stf_run* run) {
  return run ? run->status : STF_USAGE_ERROR;
}

const char* stf_run_report_json(const stf_run* run) {
  return run ? run->report.c_str() : "";
}

const char* stf_run_trajectory_csv(const stf_run* run) {
  return run ? run->csv.c_str() : "";
}

const char* stf_run_error_message(const stf_run* run) {
  return run ? run->error.c_str() : "invalid handle";
}

void stf_run_free(stf_run* run) { delete run; }

}  // extern "C"

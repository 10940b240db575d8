#pragma once

#include <stdexcept>
#include <string>

namespace staforge::report {

// Invalid request shape/values (exit code 2 at the CLI); numerical failures
// surface as numerics::NumericsError (exit code 3).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct RunOutcome {
  std::string reportJson;
  std::string trajectoryCsv;
};

const char* version();

// Executes one JSON request:
//   { "command": "expansion"|"transport"|"spin"|"sweep",
//     "points": 2001, "tolerance": <optional relTol>,
//     "params": { ... per command ... } }
// Returns the serialized report plus the trajectory (or sweep) CSV.
RunOutcome runRequest(const std::string& requestJson);

}  // namespace staforge::report

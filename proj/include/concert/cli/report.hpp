#pragma once

// Structured run reports and command dispatch.

#include <string>

#include <json.hpp>

#include "concert/cli/config.hpp"

namespace concert::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitStatus : int {
  kAccepted = 0,
  kRejected = 1,
  kInfeasible = 2,  // empty acceptance interval, or stopped at stage 1
  kInputError = 3,
};

struct Report {
  nlohmann::ordered_json body;
  std::string summary;  // human-readable, a few lines
  int exit_status = kInputError;
};

/// Pretty-printed JSON, newline terminated. Throws std::logic_error if any
/// number in the body is not finite.
std::string serialize_report(const Report& report);
/// Reads back the body and exit status; the summary is not part of the file.
Report parse_report(const std::string& text);

/// Runs one command. Never throws: failures become exit status 3 with an
/// "error" object in the body, infeasibility becomes exit status 2.
Report execute(const RunConfig& config);

}  // namespace concert::cli

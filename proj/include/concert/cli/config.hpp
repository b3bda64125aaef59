#pragma once

// Run configuration for the command-line tool.
//
// File grammar, one setting per line:
//
//   # comment
//   key = value
//
// Blank lines and lines whose first non-blank character is '#' are ignored.
// Keys use underscores (a_prime, delta_p); the matching flags use dashes
// (--a-prime, --delta-p). Values run to the end of the line with surrounding
// blanks trimmed. Later settings win, and flags are applied after the file.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace concert::cli {

enum class Command {
  validate,
  certify,
  xvalidate,
  validate_est,
  certify_est,
  estimate_diameter,
  qmu,
  simulate,
};

const char* to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

struct RunConfig {
  Command command = Command::validate;

  std::optional<double> a;
  std::optional<double> a_prime;
  double p = 0.5;
  double delta1 = 0.05;
  double delta2 = 0.05;
  std::string b_policy = "right";  // left, right, midpoint or a number

  // Known diameters (validate, certify, xvalidate, qmu).
  std::optional<double> diameter;
  std::optional<double> diameter2;
  std::string radius = "standard";  // certify: standard or unbalanced

  // Estimated diameters (validate-est, certify-est, estimate-diameter).
  std::optional<double> c;
  std::optional<double> c2;
  double eps = 1.0;
  std::optional<double> tau;
  std::optional<double> tau2;
  std::optional<double> assumed_delta;

  std::optional<double> delta_p;  // xvalidate

  std::optional<std::string> data;
  std::optional<std::string> reference;  // estimate-diameter: second sample file
  std::optional<std::string> output;

  // simulate
  std::string scenario = "all";
  std::uint64_t seed = 0;
  std::size_t trials = 10000;
  std::optional<std::size_t> n;
  unsigned threads = 1;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Every key the grammar accepts, in serialization order.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual value. Throws InvalidInput for unknown
/// keys or malformed values.
void set_field(RunConfig& config, std::string_view key, std::string_view value);

/// Applies a config file's text on top of `base`. Errors name the line.
RunConfig parse_config(std::string_view text, RunConfig base = {});

/// Emits every set field; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Throws InvalidInput listing every field the command needs but lacks.
void require_fields(const RunConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace concert::cli

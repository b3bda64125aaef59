#include "concert/cli/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "concert/errors.hpp"

namespace concert::cli {
namespace {

constexpr std::array<std::pair<Command, std::string_view>, 8> kCommands{{
    {Command::validate, "validate"},
    {Command::certify, "certify"},
    {Command::xvalidate, "xvalidate"},
    {Command::validate_est, "validate-est"},
    {Command::certify_est, "certify-est"},
    {Command::estimate_diameter, "estimate-diameter"},
    {Command::qmu, "qmu"},
    {Command::simulate, "simulate"},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string bad_value(std::string_view key, std::string_view value, const char* expected) {
  return "setting '" + std::string(key) + "': expected " + expected + ", got '" +
         std::string(value) + "'";
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw InvalidInput(bad_value(key, value, "a finite number"));
  }
  return out;
}

template <class T>
T to_unsigned(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw InvalidInput(bad_value(key, value, "a non-negative integer"));
  }
  return out;
}

void check_b_policy(std::string_view value) {
  if (value == "left" || value == "right" || value == "midpoint") return;
  to_double("b_policy", value);
}

}  // namespace

const char* to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name.data();
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  return std::nullopt;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "command", "a",      "a_prime", "p",      "delta1",        "delta2",  "b_policy",
      "diameter", "diameter2", "radius", "c",   "c2",            "eps",     "tau",
      "tau2",    "assumed_delta", "delta_p", "data", "reference", "output",  "scenario",
      "seed",    "trials", "n",       "threads"};
  return keys;
}

void set_field(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (value.empty()) throw InvalidInput("setting '" + std::string(key) + "' has no value");

  if (key == "command") {
    const auto cmd = parse_command(value);
    if (!cmd) throw InvalidInput(bad_value(key, value, "a command name"));
    c.command = *cmd;
  } else if (key == "a") {
    c.a = to_double(key, value);
  } else if (key == "a_prime") {
    c.a_prime = to_double(key, value);
  } else if (key == "p") {
    c.p = to_double(key, value);
  } else if (key == "delta1") {
    c.delta1 = to_double(key, value);
  } else if (key == "delta2") {
    c.delta2 = to_double(key, value);
  } else if (key == "b_policy") {
    check_b_policy(value);
    c.b_policy = std::string(value);
  } else if (key == "diameter") {
    c.diameter = to_double(key, value);
  } else if (key == "diameter2") {
    c.diameter2 = to_double(key, value);
  } else if (key == "radius") {
    if (value != "standard" && value != "unbalanced") {
      throw InvalidInput(bad_value(key, value, "'standard' or 'unbalanced'"));
    }
    c.radius = std::string(value);
  } else if (key == "c") {
    c.c = to_double(key, value);
  } else if (key == "c2") {
    c.c2 = to_double(key, value);
  } else if (key == "eps") {
    c.eps = to_double(key, value);
  } else if (key == "tau") {
    c.tau = to_double(key, value);
  } else if (key == "tau2") {
    c.tau2 = to_double(key, value);
  } else if (key == "assumed_delta") {
    c.assumed_delta = to_double(key, value);
  } else if (key == "delta_p") {
    c.delta_p = to_double(key, value);
  } else if (key == "data") {
    c.data = std::string(value);
  } else if (key == "reference") {
    c.reference = std::string(value);
  } else if (key == "output") {
    c.output = std::string(value);
  } else if (key == "scenario") {
    c.scenario = std::string(value);
  } else if (key == "seed") {
    c.seed = to_unsigned<std::uint64_t>(key, value);
  } else if (key == "trials") {
    c.trials = to_unsigned<std::size_t>(key, value);
  } else if (key == "n") {
    c.n = to_unsigned<std::size_t>(key, value);
  } else if (key == "threads") {
    c.threads = to_unsigned<unsigned>(key, value);
  } else {
    throw InvalidInput("unknown setting '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_field(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const InvalidInput& e) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  auto num = [&](const char* key, const std::optional<double>& v) {
    if (v) out << key << " = " << format_double(*v) << '\n';
  };
  auto str = [&](const char* key, const std::optional<std::string>& v) {
    if (v) out << key << " = " << *v << '\n';
  };
  out << "command = " << to_string(c.command) << '\n';
  num("a", c.a);
  num("a_prime", c.a_prime);
  num("p", c.p);
  num("delta1", c.delta1);
  num("delta2", c.delta2);
  str("b_policy", c.b_policy);
  num("diameter", c.diameter);
  num("diameter2", c.diameter2);
  str("radius", c.radius);
  num("c", c.c);
  num("c2", c.c2);
  num("eps", c.eps);
  num("tau", c.tau);
  num("tau2", c.tau2);
  num("assumed_delta", c.assumed_delta);
  num("delta_p", c.delta_p);
  str("data", c.data);
  str("reference", c.reference);
  str("output", c.output);
  str("scenario", c.scenario);
  out << "seed = " << c.seed << '\n';
  out << "trials = " << c.trials << '\n';
  if (c.n) out << "n = " << *c.n << '\n';
  out << "threads = " << c.threads << '\n';
  return out.str();
}

void require_fields(const RunConfig& c) {
  std::vector<std::string> missing;
  auto need = [&](bool present, const char* key) {
    if (!present) missing.emplace_back(key);
  };
  switch (c.command) {
    case Command::validate:
      need(c.a.has_value(), "a");
      need(c.a_prime.has_value(), "a_prime");
      need(c.diameter.has_value(), "diameter");
      need(c.data.has_value(), "data");
      break;
    case Command::certify:
      need(c.a.has_value(), "a");
      need(c.a_prime.has_value(), "a_prime");
      need(c.diameter.has_value(), "diameter");
      need(c.diameter2.has_value(), "diameter2");
      need(c.data.has_value(), "data");
      break;
    case Command::xvalidate:
      need(c.a.has_value(), "a");
      need(c.a_prime.has_value(), "a_prime");
      need(c.diameter.has_value(), "diameter");
      need(c.delta_p.has_value(), "delta_p");
      need(c.data.has_value(), "data");
      break;
    case Command::validate_est:
      need(c.a.has_value(), "a");
      need(c.a_prime.has_value(), "a_prime");
      need(c.c.has_value(), "c");
      need(c.data.has_value(), "data");
      break;
    case Command::certify_est:
      need(c.a.has_value(), "a");
      need(c.a_prime.has_value(), "a_prime");
      need(c.c.has_value(), "c");
      need(c.c2.has_value(), "c2");
      need(c.data.has_value(), "data");
      break;
    case Command::estimate_diameter:
      need(c.data.has_value(), "data");
      break;
    case Command::qmu:
      need(c.a_prime.has_value(), "a_prime");
      need(c.diameter.has_value(), "diameter");
      need(c.data.has_value(), "data");
      break;
    case Command::simulate: break;
  }
  if (!missing.empty()) {
    std::string msg = std::string(to_string(c.command)) + " needs";
    for (const auto& k : missing) msg += " " + k;
    throw InvalidInput(msg);
  }
}

}  // namespace concert::cli

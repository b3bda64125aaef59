// concert: command-line front end for the concentration-of-measure tests.
//
//   concert <command> [--config FILE] [--key value ...]
//
// Settings come from, in increasing priority: built-in defaults, the
// CONCERT_SEED / CONCERT_THREADS environment variables, the config file,
// and flags. CONCERT_THREADS also caps the thread count of simulate.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "concert/cli/config.hpp"
#include "concert/cli/report.hpp"
#include "concert/errors.hpp"

using concert::cli::RunConfig;

namespace {

std::optional<unsigned> env_unsigned(const char* name) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return std::nullopt;
  unsigned long long v = 0;
  const std::string_view s(raw);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw concert::InvalidInput(std::string(name) + " must be a non-negative integer");
  }
  return static_cast<unsigned>(std::min<unsigned long long>(v, 1u << 16));
}

int fail(const std::string& message) {
  std::cerr << "concert: " << message << "\n";
  return concert::cli::kInputError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentration-of-measure validation and certification tests"};
  app.set_version_flag("--version", "concert 1.0");

  std::string command;
  std::string config_path;
  app.add_option("command", command,
                 "validate | certify | xvalidate | validate-est | certify-est | "
                 "estimate-diameter | qmu | simulate")
      ->required();
  app.add_option("--config", config_path, "key = value settings file");

  std::map<std::string, std::string> flags;
  for (const auto& key : concert::cli::config_keys()) {
    if (key == "command") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    app.add_option(flag, flags[key]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return concert::cli::kInputError;
  }

  RunConfig config;
  unsigned cap = 0;
  try {
    config.threads = std::max(1u, std::thread::hardware_concurrency());
    if (auto seed = env_unsigned("CONCERT_SEED")) config.seed = *seed;
    if (auto t = env_unsigned("CONCERT_THREADS")) {
      cap = std::max(1u, *t);
      config.threads = cap;
    }
    concert::cli::set_field(config, "command", command);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) return fail("cannot open config file '" + config_path + "'");
      std::ostringstream text;
      text << in.rdbuf();
      config = concert::cli::parse_config(text.str(), config);
      concert::cli::set_field(config, "command", command);
    }
    for (const auto& key : concert::cli::config_keys()) {
      if (key == "command") continue;
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (app.count(flag) > 0) concert::cli::set_field(config, key, flags[key]);
    }
    if (cap > 0) config.threads = std::min(config.threads, cap);
  } catch (const std::exception& e) {
    return fail(e.what());
  }

  const concert::cli::Report report = concert::cli::execute(config);
  std::string text;
  try {
    text = concert::cli::serialize_report(report);
  } catch (const std::exception& e) {
    return fail(e.what());
  }

  if (config.output) {
    std::ofstream out(*config.output, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) {
      return fail("cannot write report to '" + *config.output + "'");
    }
    std::cout << report.summary;
  } else {
    std::cout << text;
    std::cerr << report.summary;
  }
  return report.exit_status;
}

// wavepin: run, validate and cross-validate wave-pinning scenarios.
//
// Exit codes: 0 success, 1 usage or I/O failure, 2 config error, 3 numerical
// failure. Diagnostics go to stderr; reports to stdout.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "wavepin/errors.hpp"
#include "wavepin/kinetics.hpp"
#include "wavepin/scenarios.hpp"

using namespace wavepin;
using nlohmann::json;

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("WAVEPIN_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string("WAVEPIN_THREADS must be a positive integer, got '") + env + "'");
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

json read_config_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunConfig resolve(const std::string& path, const std::optional<std::string>& out_dir,
                  const std::optional<double>& t_end) {
  json j = read_config_json(path);
  // overrides go through the same strict parse as the file
  if (j.is_object()) {
    if (out_dir) j["output_dir"] = *out_dir;
    if (t_end) j["t_end"] = *t_end;
  }
  return parse_config(j);
}

int cmd_run(const RunConfig& c) {
  const Manifest m = execute(c, c.output_dir);
  std::cout << m.summary.dump(2) << "\n";
  std::cerr << "wavepin: " << c.scenario << " wrote " << m.files.size() + 1 << " files to " << c.output_dir
            << " in " << m.wall_time_s << " s\n";
  return 0;
}

// A bare kinetics file {"kinetics": {...}, "samples": n} or any run config.
int cmd_validate(const std::string& path) {
  const json j = read_config_json(path);
  KineticsSpec spec;
  std::size_t samples = 64;
  if (j.is_object() && j.contains("scenario")) {
    spec = parse_config(j).kinetics;
  } else {
    if (!j.is_object()) throw ConfigError(path + " must hold a JSON object");
    for (const auto& [k, v] : j.items()) {
      if (k != "kinetics" && k != "samples") throw ConfigError("unknown key '" + k + "' in " + path);
    }
    json wrapped{{"scenario", "front-speed"}};
    if (j.contains("kinetics")) wrapped["kinetics"] = j["kinetics"];
    spec = parse_config(wrapped).kinetics;
    if (j.contains("samples")) {
      if (!j["samples"].is_number_integer() || j["samples"].get<long long>() < 2 || j["samples"].get<std::size_t>() < 2) {
        throw ConfigError("samples must be an integer >= 2");
      }
      samples = j["samples"].get<std::size_t>();
    }
  }
  const Kinetics k = Kinetics::from_params(spec.form, spec.params);
  const ConditionReport rep = validate_conditions(k, samples);
  std::cout << rep.summary() << "\n";
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavepin: wave-pinning reaction-diffusion experiments"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out_dir;
  std::optional<double> t_end;

  auto* run = app.add_subcommand("run", "run the scenario named in a config file");
  run->add_option("config", config, "run configuration (JSON)")->required();
  run->add_option("--output-dir", out_dir, "output directory (overrides output_dir)");
  run->add_option("--t-end", t_end, "final time (overrides t_end)");

  auto* val = app.add_subcommand("validate", "check the kinetics conditions");
  val->add_option("config", config, "kinetics or run configuration (JSON)")->required();

  auto* cross = app.add_subcommand("cross-validate", "compare pde2d and fbp from one interface");
  cross->add_option("config", config, "run configuration (JSON)")->required();
  cross->add_option("--output-dir", out_dir, "output directory (overrides output_dir)");
  cross->add_option("--t-end", t_end, "final time (overrides t_end)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    apply_thread_cap();
    if (*run) return cmd_run(resolve(config, out_dir, t_end));
    if (*val) return cmd_validate(config);
    if (*cross) {
      json j = read_config_json(config);
      if (j.is_object() && j.value("scenario", "") != "cross-validate") {
        throw ConfigError("cross-validate needs a config with scenario cross-validate");
      }
      return cmd_run(resolve(config, out_dir, t_end));
    }
  } catch (const ConfigError& e) {
    std::cerr << "wavepin: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "wavepin: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "wavepin: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "wavepin: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    // invalid arguments reaching a module are configuration problems
    std::cerr << "wavepin: " << e.what() << "\n";
    return dynamic_cast<const std::invalid_argument*>(&e) ? 2 : 3;
  }
  return 1;
}

// Copyright 2026 The platoon-dp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line front end: solve, simulate, compare, sweep, bench.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "platoon/commands.hpp"
#include "platoon/errors.hpp"
#include "platoon/poisson_solver.hpp"
#include "platoon/serialization.hpp"

namespace {

using nlohmann::json;
using platoon::RunConfig;

constexpr int kUsageError = 1;
constexpr int kNumericalError = 2;

// Flag values; only flags given on the command line override the config file.
struct Flags {
  std::string config_path;
  std::string output;
  std::string emit_vehicles;
  json overrides = json::object();
};

template <typename T>
void bind(CLI::App* app, Flags& flags, const std::string& name, const std::string& key,
          const std::string& help) {
  app->add_option_function<T>(
      name, [&flags, key](const T& value) { flags.overrides[key] = value; }, help);
}

void bind_vector(CLI::App* app, Flags& flags, const std::string& name, const std::string& key,
                 const std::string& help, bool numeric) {
  auto convert = [&flags, key, numeric](const std::vector<std::string>& items) {
    json list = json::array();
    for (const auto& item : items) {
      if (!numeric) {
        list.push_back(item);
        continue;
      }
      double value = 0.0;
      if (!CLI::detail::lexical_cast(item, value)) {
        throw CLI::ValidationError(key, "'" + item + "' is not a number");
      }
      // Seeds are integers; keep them so the config hash is stable.
      if (value == static_cast<double>(static_cast<long long>(value)) && key == "seeds") {
        list.push_back(static_cast<std::uint64_t>(value));
      } else {
        list.push_back(value);
      }
    }
    flags.overrides[key] = list;
  };
  app->add_option_function<std::vector<std::string>>(name, convert, help)
      ->delimiter(',')
      ->expected(1, -1);
}

void add_common(CLI::App* app, Flags& flags) {
  app->add_option("--config", flags.config_path, "JSON config; flags override it")
      ->check(CLI::ExistingFile);
  app->add_option("-o,--output", flags.output, "write the result here instead of stdout");
  bind<std::uint64_t>(app, flags, "--seed", "seed", "RNG seed (fallback: $PLATOON_DP_SEED)");
  bind<double>(app, flags, "--gamma", "gamma", "discount factor");
  bind<double>(app, flags, "--d2-km", "d2_km", "cruising distance, km");
  bind<double>(app, flags, "--d1-km", "d1_km", "coordinating distance, km");
}

void add_grid(CLI::App* app, Flags& flags) {
  bind<double>(app, flags, "--grid-m", "grid_m", "lower grid bound, s");
  bind<double>(app, flags, "--grid-n", "grid_n", "upper grid bound, s");
  bind<double>(app, flags, "--grid-step", "grid_step", "grid spacing, s");
  bind<double>(app, flags, "--epsilon", "epsilon", "value iteration tolerance");
  bind<int>(app, flags, "--max-sweeps", "max_sweeps", "value iteration sweep cap");
}

void add_simulation(CLI::App* app, Flags& flags) {
  bind<std::string>(app, flags, "--schedule", "schedule", "hourly flow CSV (default: bundled)");
  bind<double>(app, flags, "--scale", "scale", "coordinable fraction of the flows");
  bind<double>(app, flags, "--avg-flow", "avg_flow_vph", "target average flow, veh/hour");
  bind<double>(app, flags, "--duration", "duration_s", "simulated time, s");
  bind<double>(app, flags, "--tau", "tau", "policy_a threshold, s (default: calibrated)");
  bind<double>(app, flags, "--theta", "theta", "policy_b threshold, s");
  bind<double>(app, flags, "--c", "c", "policy_b cruise time reduction, s");
  bind<double>(app, flags, "--beta", "beta", "rate estimator discount");
  bind<int>(app, flags, "--window", "window", "rate estimator window");
  bind<double>(app, flags, "--resolve-threshold", "resolve_threshold",
               "rts: re-solve only when the rate moved by this fraction");
}

// Builds the effective config: defaults, then file, then seed env, then flags.
RunConfig build_config(const Flags& flags) {
  RunConfig config;
  json file = json::object();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    try {
      file = json::parse(in);
    } catch (const json::exception& e) {
      throw platoon::ConfigError(std::string("config: ") + e.what());
    }
    config.merge_json(file);
  }
  if (!file.contains("seed")) {
    if (const char* env = std::getenv("PLATOON_DP_SEED")) {
      try {
        config.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw platoon::ConfigError("PLATOON_DP_SEED is not an unsigned integer");
      }
    }
  }
  json overrides = flags.overrides;
  json params = json::object();
  for (const char* key : {"gamma", "d1_km", "d2_km"}) {
    if (overrides.contains(key)) {
      params[key] = overrides[key];
      overrides.erase(key);
    }
  }
  if (!params.empty()) overrides["params"] = params;
  config.merge_json(overrides);
  return config;
}

void emit(const Flags& flags, const std::string& text) {
  if (flags.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(flags.output);
  if (!out) throw platoon::ConfigError("cannot write " + flags.output);
  out << text;
}

int fail(int code, const std::string& kind, const std::string& message, json extra = {}) {
  json diag{{"error", kind}, {"message", message}};
  if (extra.is_object()) diag.update(extra);
  std::cerr << diag.dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated platooning at a highway junction: threshold policies and simulation",
               "platoon-dp"};
  app.set_version_flag("--version", PLATOON_DP_VERSION);
  app.require_subcommand(1);

  Flags flags;

  auto* solve = app.add_subcommand("solve", "compute the threshold policy (theta, c)");
  add_common(solve, flags);
  add_grid(solve, flags);
  bind<std::string>(solve, flags, "--solver", "solver", "bvi, ra or poisson");
  bind<std::string>(solve, flags, "--arrivals", "arrivals",
                    "exponential:RATE, constant:H, discrete:H:P,H:P or inline JSON");
  solve->add_flag_callback("--emit-values", [&flags] { flags.overrides["emit_values"] = true; },
                           "include the value function");

  auto* sim = app.add_subcommand("simulate", "run one policy over a day of arrivals");
  add_common(sim, flags);
  add_simulation(sim, flags);
  bind<std::string>(sim, flags, "--policy", "policy", "baseline, policy_a, policy_b or rts");
  sim->add_option("--emit-vehicles", flags.emit_vehicles, "per-vehicle CSV path");

  auto* compare = app.add_subcommand("compare", "policies x flow levels table (CSV)");
  add_common(compare, flags);
  add_simulation(compare, flags);
  bind_vector(compare, flags, "--policies", "policies", "policy names", false);
  bind_vector(compare, flags, "--flows", "flows", "average flows, veh/hour", true);
  bind_vector(compare, flags, "--scales", "scales", "schedule scales", true);
  bind_vector(compare, flags, "--seeds", "seeds", "seed set", true);

  auto* sweep = app.add_subcommand("sweep", "sensitivity of the average cost (CSV)");
  add_common(sweep, flags);
  add_simulation(sweep, flags);
  sweep->add_option_function<std::string>(
      "parameter", [&flags](const std::string& v) { flags.overrides["parameter"] = v; },
      "gamma or d2");
  bind_vector(sweep, flags, "--values", "values", "parameter values (d2 in km)", true);
  bind<std::string>(sweep, flags, "--policy", "policy", "policy to evaluate (default rts)");
  bind_vector(sweep, flags, "--seeds", "seeds", "seed set (default 1..5)", true);

  auto* bench = app.add_subcommand("bench", "solver wall times per arrival model (CSV)");
  add_common(bench, flags);
  add_grid(bench, flags);
  bind_vector(bench, flags, "--arrivals", "bench_arrivals", "arrival models", false);
  bind<int>(bench, flags, "--repeats", "repeats", "timing repeats (minimum is reported)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  RunConfig config;
  try {
    config = build_config(flags);
    if (*solve) {
      emit(flags, platoon::cmd_solve(config).dump(2) + "\n");
    } else if (*sim) {
      auto out = platoon::cmd_simulate(config);
      if (!flags.emit_vehicles.empty()) {
        std::ofstream csv(flags.emit_vehicles);
        if (!csv) throw platoon::ConfigError("cannot write " + flags.emit_vehicles);
        platoon::write_vehicle_csv(csv, out.result);
      }
      emit(flags, out.summary.dump(2) + "\n");
    } else if (*compare) {
      emit(flags, platoon::cmd_compare(config));
    } else if (*sweep) {
      emit(flags, platoon::cmd_sweep(config));
    } else if (*bench) {
      emit(flags, platoon::cmd_bench(config));
    }
  } catch (const platoon::ConfigError& e) {
    return fail(kUsageError, "config", e.what());
  } catch (const platoon::PoissonConvergenceError& e) {
    const auto last = e.last_iterate();
    return fail(kNumericalError, "numerical", e.what(),
                {{"last_iterate", {{"theta", last.theta}, {"c", last.c}}},
                 {"meta", platoon::run_metadata(config)}});
  } catch (const platoon::NumericalError& e) {
    return fail(kNumericalError, "numerical", e.what(), {{"meta", platoon::run_metadata(config)}});
  } catch (const platoon::DomainError& e) {
    return fail(kNumericalError, "domain", e.what(), {{"meta", platoon::run_metadata(config)}});
  } catch (const std::exception& e) {
    return fail(kNumericalError, "internal", e.what());
  }
  return 0;
}

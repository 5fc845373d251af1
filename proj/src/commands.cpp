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

#include "platoon/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "platoon/dp_solvers.hpp"
#include "platoon/errors.hpp"
#include "platoon/poisson_solver.hpp"
#include "platoon/serialization.hpp"

namespace platoon {
namespace {

using nlohmann::json;

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<T>();
  }
}

template <typename T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json();
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(seeds[i]);
  }
  return out;
}

std::string number(double value) {
  std::ostringstream os;
  os.precision(10);
  os << value;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct PolicyAverages {
  double ac = 0.0;
  double ac_per_km = 0.0;
  double fuel = 0.0;
  double time = 0.0;
};

// Means over seeds of the per-run averages.
PolicyAverages run_seeds(const FlowSchedule& schedule, const PolicySpec& policy,
                         const RunConfig& config, const CostParams& p,
                         const CostConstants& consts, const std::vector<std::uint64_t>& seeds) {
  PolicyAverages avg;
  for (auto seed : seeds) {
    const auto r = simulate(schedule, policy, p, consts, seed, config.duration_s, config.settings());
    if (!r.average_cost) throw NumericalError("simulation produced no vehicles");
    const double n = static_cast<double>(r.count());
    avg.ac += *r.average_cost;
    avg.ac_per_km += *r.average_cost_per_km();
    avg.fuel += r.total_fuel / n;
    avg.time += r.total_time / n;
  }
  const double k = static_cast<double>(seeds.size());
  avg.ac /= k;
  avg.ac_per_km /= k;
  avg.fuel /= k;
  avg.time /= k;
  return avg;
}

std::vector<std::uint64_t> seeds_or(const RunConfig& config, std::vector<std::uint64_t> fallback) {
  return config.seeds.empty() ? fallback : config.seeds;
}

}  // namespace

void RunConfig::merge_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::vector<std::string> kKeys = {
      "params", "grid_m", "grid_n", "grid_step", "epsilon", "max_sweeps", "solver", "arrivals", "schedule",
      "scale", "avg_flow_vph", "policy", "tau", "calibration_seed", "theta", "c", "beta",
      "window", "resolve_threshold", "t_safety", "v_max", "seed", "duration_s", "emit_values",
      "policies", "flows", "scales", "seeds", "parameter", "values", "bench_arrivals",
      "repeats"};
  for (const auto& item : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), item.key()) == kKeys.end()) {
      throw ConfigError("config: unknown key '" + item.key() + "'");
    }
  }
  try {
    if (j.contains("params")) {
      json merged = params.to_json();
      merged.update(j.at("params"));
      params = CostParams::from_json(merged);
    }
    read_key(j, "grid_m", grid_m);
    read_key(j, "grid_n", grid_n);
    read_key(j, "grid_step", grid_step);
    read_key(j, "epsilon", epsilon);
    read_key(j, "max_sweeps", max_sweeps);
    read_key(j, "solver", solver);
    if (j.contains("arrivals")) {
      const auto& a = j.at("arrivals");
      if (a.is_null()) {
        arrivals.reset();
      } else {
        arrivals = a.is_string() ? a.get<std::string>() : a.dump();
      }
    }
    read_optional(j, "schedule", schedule);
    read_optional(j, "scale", scale);
    read_optional(j, "avg_flow_vph", avg_flow_vph);
    read_key(j, "policy", policy);
    read_optional(j, "tau", tau);
    read_key(j, "calibration_seed", calibration_seed);
    read_optional(j, "theta", theta);
    read_optional(j, "c", c);
    read_key(j, "beta", beta);
    read_key(j, "window", window);
    read_key(j, "resolve_threshold", resolve_threshold);
    read_key(j, "t_safety", t_safety);
    read_key(j, "v_max", v_max);
    read_key(j, "seed", seed);
    read_key(j, "duration_s", duration_s);
    read_key(j, "emit_values", emit_values);
    read_key(j, "policies", policies);
    read_key(j, "flows", flows);
    read_key(j, "scales", scales);
    read_key(j, "seeds", seeds);
    read_key(j, "parameter", parameter);
    read_key(j, "values", values);
    read_key(j, "bench_arrivals", bench_arrivals);
    read_key(j, "repeats", repeats);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json RunConfig::to_json() const {
  return {{"params", params.to_json()},
          {"grid_m", grid_m},
          {"grid_n", grid_n},
          {"grid_step", grid_step},
          {"epsilon", epsilon},
          {"max_sweeps", max_sweeps},
          {"solver", solver},
          {"arrivals", optional_json(arrivals)},
          {"schedule", optional_json(schedule)},
          {"scale", optional_json(scale)},
          {"avg_flow_vph", optional_json(avg_flow_vph)},
          {"policy", policy},
          {"tau", optional_json(tau)},
          {"calibration_seed", calibration_seed},
          {"theta", optional_json(theta)},
          {"c", optional_json(c)},
          {"beta", beta},
          {"window", window},
          {"resolve_threshold", resolve_threshold},
          {"t_safety", t_safety},
          {"v_max", v_max},
          {"seed", seed},
          {"duration_s", duration_s},
          {"emit_values", emit_values},
          {"policies", policies},
          {"flows", flows},
          {"scales", scales},
          {"seeds", seeds},
          {"parameter", parameter},
          {"values", values},
          {"bench_arrivals", bench_arrivals},
          {"repeats", repeats}};
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

SimSettings RunConfig::settings() const {
  if (!(t_safety >= 0.0)) throw ConfigError("t_safety must be >= 0");
  if (!(v_max > params.v)) throw ConfigError("v_max must exceed the nominal speed");
  SimSettings s;
  s.t_safety = t_safety;
  s.v_max = v_max;
  return s;
}

StateGrid RunConfig::grid() const { return StateGrid(grid_m, grid_n, grid_step); }

ArrivalModel RunConfig::arrival_model() const {
  if (!arrivals) throw ConfigError("an arrival model is required (--arrivals)");
  return ArrivalModel::parse(*arrivals);
}

FlowSchedule RunConfig::flow_schedule() const {
  if (scale && avg_flow_vph) throw ConfigError("set at most one of scale and avg_flow_vph");
  FlowSchedule base = schedule ? FlowSchedule::read_csv(std::filesystem::path(*schedule))
                               : FlowSchedule::bundled();
  if (scale) return base.with_scale(*scale);
  if (avg_flow_vph) return base.with_average(*avg_flow_vph);
  return base;
}

PolicySpec resolve_policy(const std::string& name, const RunConfig& config,
                          const FlowSchedule& schedule, const CostParams& p,
                          const CostConstants& consts) {
  if (name == "baseline") return PolicySpec::baseline();
  if (name == "policy_a") {
    if (config.tau) return PolicySpec::policy_a(*config.tau);
    const auto calibration =
        generate_arrivals(schedule, config.calibration_seed, config.duration_s);
    return PolicySpec::policy_a(
        calibrate_policy_a(calibration, p, consts, config.settings()).tau);
  }
  if (name == "policy_b") {
    if (config.theta.has_value() != config.c.has_value()) {
      throw ConfigError("policy_b needs both theta and c, or neither");
    }
    if (config.theta) return PolicySpec::policy_b(ThresholdPolicy{*config.theta, *config.c});
    const double rate = schedule.average_flow_vph() / 3600.0;
    const auto sol = solve_poisson(rate, p, consts);
    return PolicySpec::policy_b(ThresholdPolicy{sol.theta, sol.c});
  }
  if (name == "rts") {
    RealTimePolicy rts;
    rts.beta = config.beta;
    rts.window = config.window;
    rts.resolve_threshold = config.resolve_threshold;
    return PolicySpec::rts(rts);
  }
  throw ConfigError("unknown policy '" + name + "' (baseline, policy_a, policy_b, rts)");
}

json run_metadata(const RunConfig& config) {
  return {{"version", PLATOON_DP_VERSION},
          {"seed", config.seed},
          {"rng", Rng::kAlgorithm},
          {"config_hash", config.hash()}};
}

json cmd_solve(const RunConfig& config) {
  config.params.validate();
  const auto consts = compute_constants(config.params);
  const auto model = config.arrival_model();
  json out;
  if (config.solver == "poisson") {
    if (!model.is_exponential()) {
      throw ConfigError("the poisson solver needs exponential arrivals");
    }
    const auto sol = solve_poisson(model.rate(), config.params, consts);
    out = to_json(sol);
  } else if (config.solver == "bvi") {
    const auto grid = config.grid();
    grid.require_brackets(consts);
    BviOptions options;
    options.epsilon = config.epsilon;
    options.max_sweeps = config.max_sweeps;
    out = to_json(solve_bvi(grid, model, config.params, consts, options), config.emit_values);
  } else if (config.solver == "ra") {
    const auto grid = config.grid();
    grid.require_brackets(consts);
    out = to_json(solve_ra(grid, model, config.params, consts), config.emit_values);
  } else {
    throw ConfigError("unknown solver '" + config.solver + "' (bvi, ra, poisson)");
  }
  out["arrivals"] = model.to_json();
  out["constants"] = {{"t0", consts.t0},
                      {"c_n", consts.c_n},
                      {"g0", consts.g0},
                      {"theta_n", consts.theta_n},
                      {"theta_n_prime", consts.theta_n_prime}};
  out["meta"] = run_metadata(config);
  return out;
}

SimulateOutput cmd_simulate(const RunConfig& config) {
  config.params.validate();
  const auto consts = compute_constants(config.params);
  const auto schedule = config.flow_schedule();
  const auto policy = resolve_policy(config.policy, config, schedule, config.params, consts);
  SimulateOutput out;
  out.result = simulate(schedule, policy, config.params, consts, config.seed, config.duration_s,
                        config.settings());
  out.summary = to_json(out.result);
  out.summary["avg_flow_vph"] = schedule.average_flow_vph();
  out.summary["scale"] = schedule.scale;
  if (const auto* a = std::get_if<InterArrivalPolicy>(&policy.kind)) {
    out.summary["tau"] = a->tau;
  }
  if (const auto* b = std::get_if<StaticThresholdPolicy>(&policy.kind)) {
    out.summary["theta"] = b->policy.theta;
    out.summary["c"] = b->policy.c;
  }
  out.summary["meta"] = run_metadata(config);
  return out;
}

std::string cmd_compare(const RunConfig& config) {
  config.params.validate();
  if (config.flows.empty() == config.scales.empty()) {
    throw ConfigError("compare needs exactly one of flows and scales");
  }
  const auto consts = compute_constants(config.params);
  const auto seeds = seeds_or(config, {config.seed});
  RunConfig base = config;
  base.scale.reset();
  base.avg_flow_vph.reset();
  const FlowSchedule raw = base.flow_schedule();
  std::vector<FlowSchedule> levels;
  for (double f : config.flows) levels.push_back(raw.with_average(f));
  for (double s : config.scales) levels.push_back(raw.with_scale(s));

  const std::string tail = "," + join_seeds(seeds) + "," + config.hash() + "," + PLATOON_DP_VERSION;
  std::ostringstream out;
  out << "policy,avg_flow_vph,AC,avg_fuel_L,avg_time_s,seeds,config_hash,version\n";
  for (const auto& name : config.policies) {
    for (const auto& level : levels) {
      const auto policy = resolve_policy(name, config, level, config.params, consts);
      const auto avg = run_seeds(level, policy, config, config.params, consts, seeds);
      out << csv_field(name) << ',' << number(level.average_flow_vph()) << ',' << number(avg.ac)
          << ',' << number(avg.fuel) << ',' << number(avg.time) << tail << '\n';
    }
  }
  return out.str();
}

std::string cmd_sweep(const RunConfig& config) {
  const bool gamma = config.parameter == "gamma";
  if (!gamma && config.parameter != "d2") {
    throw ConfigError("unknown sweep parameter '" + config.parameter + "' (gamma, d2)");
  }
  if (config.values.empty()) throw ConfigError("sweep needs at least one value");
  const auto seeds = seeds_or(config, {1, 2, 3, 4, 5});
  RunConfig local = config;
  if (!local.scale && !local.avg_flow_vph) local.avg_flow_vph = 45.0;
  const auto schedule = local.flow_schedule();

  const std::string tail = "," + join_seeds(seeds) + "," + config.hash() + "," + PLATOON_DP_VERSION;
  std::ostringstream out;
  out << "parameter,value,metric,mean,policy,avg_flow_vph,seeds,config_hash,version\n";
  for (double value : config.values) {
    CostParams p = config.params;
    if (gamma) {
      p.gamma = value;
    } else {
      p.d2 = value * 1000.0;
    }
    p.validate();
    const auto consts = compute_constants(p);
    const auto policy = resolve_policy(config.policy, local, schedule, p, consts);
    const auto avg = run_seeds(schedule, policy, local, p, consts, seeds);
    out << config.parameter << ',' << number(value) << ',' << (gamma ? "AC" : "AC_prime_per_km")
        << ',' << number(gamma ? avg.ac : avg.ac_per_km) << ',' << csv_field(config.policy) << ','
        << number(schedule.average_flow_vph()) << tail << '\n';
  }
  return out.str();
}

std::string cmd_bench(const RunConfig& config) {
  config.params.validate();
  if (config.repeats < 1) throw ConfigError("repeats must be >= 1");
  const auto consts = compute_constants(config.params);
  const auto grid = config.grid();
  grid.require_brackets(consts);
  BviOptions bvi_options;
  bvi_options.epsilon = config.epsilon;
  bvi_options.max_sweeps = config.max_sweeps;

  // Minimum wall time over the repeats.
  auto time_it = [&](const std::function<ThresholdPolicy()>& run, ThresholdPolicy& policy) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < config.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      policy = run();
      best = std::min(best, seconds_since(start));
    }
    return best;
  };

  const std::string tail = "," + number(grid.m()) + "," + number(grid.n()) + "," +
                           number(grid.step()) + "," + number(config.epsilon) + "," +
                           std::to_string(config.repeats);
  const std::string meta = "," + config.hash() + "," + PLATOON_DP_VERSION;
  std::ostringstream out;
  out << "arrivals,solver,wall_time_s,theta,c,grid_m,grid_n,grid_step,epsilon,repeats,note,"
         "config_hash,version\n";
  for (const auto& text : config.bench_arrivals) {
    const auto model = ArrivalModel::parse(text);
    const auto label = csv_field(model.name());
    ThresholdPolicy policy;
    const double t_bvi = time_it(
        [&] { return solve_bvi(grid, model, config.params, consts, bvi_options).policy; }, policy);
    out << label << ",bvi," << number(t_bvi) << ',' << number(policy.theta) << ','
        << number(policy.c) << tail << ',' << meta << '\n';
    const double t_ra =
        time_it([&] { return solve_ra(grid, model, config.params, consts).policy; }, policy);
    out << label << ",ra," << number(t_ra) << ',' << number(policy.theta) << ','
        << number(policy.c) << tail << ',' << meta << '\n';
    if (model.is_exponential()) {
      const double t_poisson = time_it(
          [&] {
            const auto s = solve_poisson(model.rate(), config.params, consts);
            return ThresholdPolicy{s.theta, s.c};
          },
          policy);
      out << label << ",poisson," << number(t_poisson) << ',' << number(policy.theta) << ','
          << number(policy.c) << tail << ',' << meta << '\n';
    } else {
      out << label << ",poisson,,," << tail << ",skipped: needs exponential arrivals" << meta << '\n';
    }
  }
  return out.str();
}

}  // namespace platoon

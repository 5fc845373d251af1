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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "platoon/cost_model.hpp"
#include "platoon/flow_schedule.hpp"
#include "platoon/simulator.hpp"

namespace platoon {

/// Everything a command needs. JSON keys mirror the field names.
struct RunConfig {
  CostParams params;
  double grid_m = -100.0;
  double grid_n = 400.0;
  double grid_step = 0.25;
  double epsilon = 0.002;
  int max_sweeps = 100000;

  std::string solver = "poisson";
  std::optional<std::string> arrivals;  ///< short form or inline JSON

  std::optional<std::string> schedule;  ///< CSV path; bundled flows when empty
  std::optional<double> scale;
  std::optional<double> avg_flow_vph;

  std::string policy = "rts";
  std::optional<double> tau;        ///< Policy A threshold; calibrated when empty
  std::uint64_t calibration_seed = 999;
  std::optional<double> theta;      ///< Policy B threshold; solved when empty
  std::optional<double> c;
  double beta = 0.9;
  int window = 50;
  double resolve_threshold = 0.0;
  double t_safety = 2.3;
  double v_max = 40.0;

  std::uint64_t seed = 1;
  double duration_s = 86400.0;
  bool emit_values = false;

  // compare and sweep
  std::vector<std::string> policies = {"baseline", "policy_a", "rts"};
  std::vector<double> flows;   ///< average flows, veh/hour
  std::vector<double> scales;  ///< alternatively, schedule scales
  std::vector<std::uint64_t> seeds;
  std::string parameter;
  std::vector<double> values;

  // bench
  std::vector<std::string> bench_arrivals = {"exponential:0.02", "discrete:15:0.4,8:0.6",
                                             "constant:10"};
  int repeats = 3;

  /// Overlays the keys present in j. Unknown keys raise ConfigError.
  void merge_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// FNV-1a of the canonical JSON form.
  std::string hash() const;

  SimSettings settings() const;
  StateGrid grid() const;
  ArrivalModel arrival_model() const;
  /// The schedule scaled per scale / avg_flow_vph (at most one may be set).
  FlowSchedule flow_schedule() const;
};

/// Builds the policy for a simulation over `schedule`. Policy A without a
/// tau is calibrated on a separate arrival stream; Policy B without (theta, c)
/// uses the Poisson solution at the day-average rate.
PolicySpec resolve_policy(const std::string& name, const RunConfig& config,
                          const FlowSchedule& schedule, const CostParams& p,
                          const CostConstants& consts);

/// Version, seed, RNG and config hash stamped on every output.
nlohmann::json run_metadata(const RunConfig& config);

nlohmann::json cmd_solve(const RunConfig& config);

struct SimulateOutput {
  nlohmann::json summary;
  SimulationResult result;
};
SimulateOutput cmd_simulate(const RunConfig& config);

/// CSV: policy,avg_flow_vph,AC,avg_fuel_L,avg_time_s,seeds,config_hash,version.
std::string cmd_compare(const RunConfig& config);

/// CSV: parameter,value,metric,mean,policy,avg_flow_vph,seeds,config_hash,version.
/// gamma sweeps report AC, d2 sweeps (values in km) report AC' per km.
std::string cmd_sweep(const RunConfig& config);

/// CSV of solver wall times per arrival model on one grid.
std::string cmd_bench(const RunConfig& config);

}  // namespace platoon

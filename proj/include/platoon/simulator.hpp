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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "platoon/arrivals.hpp"
#include "platoon/cost_model.hpp"
#include "platoon/dp_solvers.hpp"
#include "platoon/flow_schedule.hpp"
#include "platoon/poisson_solver.hpp"

namespace platoon {

/// Operating constants of the junction simulation.
struct SimSettings {
  double t_safety = 2.3;          ///< follower arrives this long after its leader, s
  double v_max = 40.0;            ///< speed cap in the coordinating zone, m/s
  double fuel_cubic = 3.51e-7;    ///< fuel rate f(v) = cubic v^3 + linear v, L/s
  double fuel_linear = 4.07e-4;

  /// Fuel rate at constant speed, L/s.
  double fuel_rate(double speed) const {
    return fuel_cubic * speed * speed * speed + fuel_linear * speed;
  }
};

struct BaselinePolicy {};

/// Merge when the raw inter-arrival time is below tau (acceleration only).
struct InterArrivalPolicy {
  double tau = 0.0;
};

/// Fixed threshold policy.
struct StaticThresholdPolicy {
  ThresholdPolicy policy;
};

/// Real-time strategy: re-estimate the rate from recent headways and
/// re-solve the Poisson system per vehicle, warm-started.
struct RealTimePolicy {
  double beta = 0.9;
  int window = 50;
  /// Re-solve only when the estimate moved by more than this relative amount;
  /// 0 re-solves at every arrival.
  double resolve_threshold = 0.0;
  PoissonOptions solver;
};

struct PolicySpec {
  std::variant<BaselinePolicy, InterArrivalPolicy, StaticThresholdPolicy, RealTimePolicy> kind;

  static PolicySpec baseline() { return {BaselinePolicy{}}; }
  static PolicySpec policy_a(double tau);
  static PolicySpec policy_b(ThresholdPolicy policy) { return {StaticThresholdPolicy{policy}}; }
  static PolicySpec rts(RealTimePolicy config = {}) { return {config}; }

  std::string name() const;
};

/// Mutable per-run policy state (rate estimator and warm start).
struct PolicyState {
  std::optional<RateEstimator> estimator;
  std::optional<PoissonSolution> last_solution;
  int solves = 0;
};

PolicyState make_policy_state(const PolicySpec& policy);

struct Decision {
  double u = 0.0;          ///< realized time reduction, safety buffer included
  double u_nominal = 0.0;  ///< time reduction before the safety buffer
  bool merged = false;
  std::optional<double> theta;  ///< per-vehicle threshold (threshold policies)
  std::optional<double> c;
  std::optional<double> lambda_hat;
};

/// S_{k+1} = X_{k+1} + U_k.
double step_state(double prev_s, double applied_u, double next_x);

/// Largest admissible time reduction under the speed cap.
double max_time_reduction(const CostParams& p, const SimSettings& settings);

/// One coordination decision for a vehicle with predicted headway s and raw
/// inter-arrival time x. The first vehicle of a run has s = +infinity.
Decision apply_policy(const PolicySpec& policy, double s, double x, PolicyState& state,
                      const CostParams& p, const CostConstants& consts,
                      const SimSettings& settings = {});

struct VehicleRecord {
  std::size_t k = 0;
  double t = 0.0;   ///< detector arrival time, s
  double x = 0.0;   ///< inter-arrival time, s
  double s = 0.0;   ///< predicted headway, s
  double u = 0.0;   ///< realized time reduction, s
  bool merged = false;
  double speed = 0.0;          ///< coordinating-zone speed v_k, m/s
  double fuel_coordinating = 0.0;  ///< L
  double fuel_cruising = 0.0;      ///< L
  double travel_time = 0.0;        ///< s
  double cost = 0.0;               ///< currency
  std::optional<double> theta;
  std::optional<double> c;
  std::optional<double> lambda_hat;

  double fuel() const { return fuel_coordinating + fuel_cruising; }
  /// Junction arrival time T_k + t0 - U_k.
  double junction_time(const CostParams& p) const { return t + p.t0() - u; }
};

/// Fills speed, fuel, time and monetary cost from the realized time reduction.
/// Throws DomainError if the speed exceeds the cap or is not positive.
VehicleRecord account_costs(VehicleRecord record, bool merged, const CostParams& p,
                            const SimSettings& settings = {});

struct SimulationResult {
  std::vector<VehicleRecord> vehicles;
  double total_cost = 0.0;
  double total_fuel = 0.0;
  double total_time = 0.0;
  std::optional<double> average_cost;             ///< AC = TC / N_t
  std::optional<double> average_cost_per_meter;   ///< TC / (N_t (d1 + d2))
  std::map<std::size_t, std::size_t> platoon_sizes;  ///< platoon size -> vehicles in such platoons
  std::uint64_t seed = 0;
  std::string policy;
  std::string rng = Rng::kAlgorithm;
  int solves = 0;

  std::size_t count() const { return vehicles.size(); }
  /// AC' in currency per kilometer.
  std::optional<double> average_cost_per_km() const;
};

/// Runs the policy over a fixed arrival stream.
SimulationResult simulate_arrivals(std::span<const Arrival> arrivals, const PolicySpec& policy,
                                   const CostParams& p, const CostConstants& consts,
                                   const SimSettings& settings = {});

/// Generates arrivals from the schedule and runs the policy over [0, duration).
SimulationResult simulate(const FlowSchedule& schedule, const PolicySpec& policy,
                          const CostParams& p, const CostConstants& consts, std::uint64_t seed,
                          double duration_s = 86400.0, const SimSettings& settings = {});

struct CalibrationResult {
  double tau = 0.0;
  double average_cost = 0.0;
};

/// Grid search of the inter-arrival threshold over [lo, hi] (step) that
/// minimizes the average cost on the given arrival stream.
CalibrationResult calibrate_policy_a(std::span<const Arrival> arrivals, const CostParams& p,
                                     const CostConstants& consts,
                                     const SimSettings& settings = {}, double lo = 0.0,
                                     double hi = 30.0, double step = 0.5);

}  // namespace platoon

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

#include "platoon/simulator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

PoissonSolution resolve(double lambda, PolicyState& state, const RealTimePolicy& config,
                        const CostParams& p, const CostConstants& consts) {
  std::optional<PoissonStart> warm;
  if (state.last_solution) warm = PoissonStart{state.last_solution->theta, state.last_solution->c};
  ++state.solves;
  try {
    return solve_poisson(lambda, p, consts, warm, config.solver);
  } catch (const PoissonConvergenceError&) {
    if (!warm) throw;
  }
  // The warm start can sit in a poor basin after a sharp rate change.
  return solve_poisson(lambda, p, consts, std::nullopt, config.solver);
}

// Threshold rule shared by the static policy and the real-time strategy.
Decision threshold_decision(double s, double theta, double c, const CostParams& p,
                            const SimSettings& settings) {
  Decision d;
  d.theta = theta;
  d.c = c;
  if (s <= theta) {
    const double realized = s - settings.t_safety;
    if (realized <= max_time_reduction(p, settings)) {
      d.u_nominal = s;
      d.u = realized;
      d.merged = true;
      return d;
    }
  }
  d.u_nominal = c;
  d.u = c;
  return d;
}

}  // namespace

PolicySpec PolicySpec::policy_a(double tau) {
  if (!(tau >= 0.0)) throw ConfigError("Policy A threshold must be non-negative");
  return {InterArrivalPolicy{tau}};
}

std::string PolicySpec::name() const {
  return std::visit(Overloaded{[](const BaselinePolicy&) { return std::string("baseline"); },
                               [](const InterArrivalPolicy&) { return std::string("policy_a"); },
                               [](const StaticThresholdPolicy&) { return std::string("policy_b"); },
                               [](const RealTimePolicy&) { return std::string("rts"); }},
                    kind);
}

PolicyState make_policy_state(const PolicySpec& policy) {
  PolicyState state;
  if (const auto* rts = std::get_if<RealTimePolicy>(&policy.kind)) {
    state.estimator.emplace(rts->beta, rts->window);
  }
  return state;
}

double step_state(double prev_s, double applied_u, double next_x) {
  (void)prev_s;
  return next_x + applied_u;
}

double max_time_reduction(const CostParams& p, const SimSettings& settings) {
  return p.t0() - p.d1 / settings.v_max;
}

Decision apply_policy(const PolicySpec& policy, double s, double x, PolicyState& state,
                      const CostParams& p, const CostConstants& consts,
                      const SimSettings& settings) {
  return std::visit(
      Overloaded{
          [&](const BaselinePolicy&) {
            Decision d;
            d.merged = s >= 0.0 && s <= settings.t_safety;
            return d;
          },
          [&](const InterArrivalPolicy& a) {
            Decision d;
            if (x < a.tau && s >= 0.0) {
              // Acceleration only: a follower already inside the safety
              // window keeps its speed.
              const double realized = std::max(s - settings.t_safety, 0.0);
              if (realized <= max_time_reduction(p, settings)) {
                d.u_nominal = s;
                d.u = realized;
                d.merged = true;
              }
            }
            return d;
          },
          [&](const StaticThresholdPolicy& b) {
            return threshold_decision(s, b.policy.theta, b.policy.c, p, settings);
          },
          [&](const RealTimePolicy& rts) {
            if (!state.estimator) state.estimator.emplace(rts.beta, rts.window);
            state.estimator->observe(x);
            const double lambda = state.estimator->estimate();
            const bool reuse = rts.resolve_threshold > 0.0 && state.last_solution &&
                               std::abs(lambda - state.last_solution->lambda) <=
                                   rts.resolve_threshold * state.last_solution->lambda;
            if (!reuse) {
              try {
                state.last_solution = resolve(lambda, state, rts, p, consts);
              } catch (const NumericalError& e) {
                throw NumericalError(std::string("real-time strategy: re-solve failed at "
                                                 "estimated rate ") +
                                     std::to_string(lambda) + ": " + e.what());
              }
            }
            auto d = threshold_decision(s, state.last_solution->theta, state.last_solution->c, p,
                                        settings);
            d.lambda_hat = lambda;
            return d;
          }},
      policy.kind);
}

VehicleRecord account_costs(VehicleRecord record, bool merged, const CostParams& p,
                            const SimSettings& settings) {
  const double zone_time = p.t0() - record.u;
  if (!(zone_time > 0.0)) throw DomainError("account_costs: non-positive coordinating time");
  record.merged = merged;
  record.speed = p.d1 / zone_time;
  if (record.speed > settings.v_max * (1.0 + 1e-12)) {
    throw DomainError("account_costs: speed " + std::to_string(record.speed) +
                      " m/s exceeds the cap");
  }
  const double cruise_time = p.d2 / p.v;
  record.fuel_coordinating = zone_time * settings.fuel_rate(record.speed);
  record.fuel_cruising = cruise_time * settings.fuel_rate(p.v) * (merged ? 1.0 - p.eta : 1.0);
  record.travel_time = zone_time + cruise_time;
  record.cost = p.w2 * record.fuel() + p.w1 * record.travel_time;
  return record;
}

std::optional<double> SimulationResult::average_cost_per_km() const {
  if (!average_cost_per_meter) return std::nullopt;
  return *average_cost_per_meter * 1000.0;
}

SimulationResult simulate_arrivals(std::span<const Arrival> arrivals, const PolicySpec& policy,
                                   const CostParams& p, const CostConstants& consts,
                                   const SimSettings& settings) {
  SimulationResult result;
  result.policy = policy.name();
  result.vehicles.reserve(arrivals.size());
  PolicyState state = make_policy_state(policy);

  double s = std::numeric_limits<double>::infinity();
  double prev_u = 0.0;
  std::size_t platoon = 0;
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    const auto& arrival = arrivals[k];
    if (k > 0) s = step_state(s, prev_u, arrival.gap);

    const Decision d = apply_policy(policy, s, arrival.gap, state, p, consts, settings);
    VehicleRecord rec;
    rec.k = k;
    rec.t = arrival.time;
    rec.x = arrival.gap;
    rec.s = s;
    rec.u = d.u;
    rec.theta = d.theta;
    rec.c = d.c;
    rec.lambda_hat = d.lambda_hat;
    rec = account_costs(rec, d.merged, p, settings);

    result.total_cost += rec.cost;
    result.total_fuel += rec.fuel();
    result.total_time += rec.travel_time;
    if (d.merged) {
      ++platoon;
    } else {
      if (platoon > 0) result.platoon_sizes[platoon] += platoon;
      platoon = 1;
    }
    result.vehicles.push_back(rec);
    prev_u = d.u;
  }
  if (platoon > 0) result.platoon_sizes[platoon] += platoon;

  const auto n = static_cast<double>(result.vehicles.size());
  if (n > 0) {
    result.average_cost = result.total_cost / n;
    result.average_cost_per_meter = result.total_cost / (n * (p.d1 + p.d2));
  }
  result.solves = state.solves;
  return result;
}

SimulationResult simulate(const FlowSchedule& schedule, const PolicySpec& policy,
                          const CostParams& p, const CostConstants& consts, std::uint64_t seed,
                          double duration_s, const SimSettings& settings) {
  const auto arrivals = generate_arrivals(schedule, seed, duration_s);
  auto result = simulate_arrivals(arrivals, policy, p, consts, settings);
  result.seed = seed;
  return result;
}

CalibrationResult calibrate_policy_a(std::span<const Arrival> arrivals, const CostParams& p,
                                     const CostConstants& consts, const SimSettings& settings,
                                     double lo, double hi, double step) {
  if (arrivals.empty()) throw ConfigError("Policy A calibration needs at least one arrival");
  if (!(step > 0.0) || !(hi >= lo) || !(lo >= 0.0)) {
    throw ConfigError("Policy A calibration grid is invalid");
  }
  CalibrationResult best{lo, std::numeric_limits<double>::infinity()};
  const auto count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= count; ++i) {
    const double tau = lo + step * i;
    const auto run = simulate_arrivals(arrivals, PolicySpec::policy_a(tau), p, consts, settings);
    if (*run.average_cost < best.average_cost) best = {tau, *run.average_cost};
  }
  return best;
}

}  // namespace platoon

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

#include "json.hpp"

namespace platoon {

/**
 * Physical and economic constants of the junction, all in SI-derived units
 * (seconds, meters, liters, currency).
 */
struct CostParams {
  double w1 = 25.8 / 3600.0;   ///< value of time, currency / s
  double w2 = 0.868;           ///< fuel price, currency / L
  double alpha = 3.51e-7;      ///< fuel-vs-speed coefficient, L s^2 / m^3
  double eta = 0.1;            ///< platoon fuel-saving fraction
  double phi = 32.2 / 1e5;     ///< fuel efficiency, L / m
  double v = 23.0;             ///< nominal cruise speed, m/s
  double d1 = 1000.0;          ///< coordinating-zone length, m
  double d2 = 30000.0;         ///< cruising-zone length, m
  double gamma = 0.9;          ///< discount factor

  /// Nominal traversal time of the coordinating zone.
  double t0() const { return d1 / v; }

  /// Throws ConfigError unless every field is positive, finite, and
  /// gamma, eta lie in (0, 1).
  void validate() const;

  /// Parameters from the flat ingestion object. Keys use the ingestion units
  /// (currency/hour, L/100km, km); missing keys keep the nominal values.
  static CostParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Constants derived analytically from the reward family.
struct CostConstants {
  double t0 = 0;             ///< d1 / v
  double c_n = 0;            ///< argmax of the merge reward
  double g0 = 0;             ///< platooning bonus, merge reward at 0
  double theta_n = 0;        ///< one-stage threshold, root in (c_n, t0)
  double theta_n_prime = 0;  ///< root in (-inf, c_n)
};

/// Smallest admissible distance to the t0 singularity, seconds.
inline constexpr double kSingularityGuard = 1e-9;

/// Merge reward G(s): reward for catching up with the vehicle ahead.
double reward_merge(double s, const CostParams& p);

/// Cruise reward H(a) = G(a) - G(0).
double reward_cruise(double a, const CostParams& p);

/// Full reward R(s, a); a == s is the merge branch when s < t0.
double reward(double s, double a, const CostParams& p);

/// dG/ds.
double reward_merge_derivative(double s, const CostParams& p);

/// Platooning bonus G(0) = w2 * eta * phi * d2.
double platoon_bonus(const CostParams& p);

CostConstants compute_constants(const CostParams& p);

}  // namespace platoon

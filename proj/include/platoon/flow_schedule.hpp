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
#include <filesystem>
#include <istream>
#include <vector>

#include "platoon/arrivals.hpp"

namespace platoon {

struct HourlyFlow {
  int hour = 0;
  double flow1_vph = 0.0;  ///< branch 1, vehicles per hour
  double flow2_vph = 0.0;  ///< branch 2, vehicles per hour
};

/**
 * Hourly flows of both branches for one day. Only the fraction `scale` of the
 * traffic is coordinable; both branches feed a single merged arrival stream.
 */
struct FlowSchedule {
  std::vector<HourlyFlow> hours;
  double scale = 1.0;

  /// Throws ConfigError unless there are 24 rows for hours 0..23 with
  /// non-negative flows and scale lies in (0, 1].
  void validate() const;

  /// Merged coordinable arrival rate in veh/s during the given hour (taken
  /// modulo 24).
  double rate(int hour) const;
  /// Mean coordinable flow over the day, veh/hour.
  double average_flow_vph() const;
  /// The scale that makes average_flow_vph() equal target.
  double scale_for_average(double target_vph) const;
  FlowSchedule with_scale(double s) const;
  FlowSchedule with_average(double target_vph) const { return with_scale(scale_for_average(target_vph)); }

  /// CSV with header "hour,flow1_vph,flow2_vph" and 24 data rows.
  static FlowSchedule read_csv(std::istream& in);
  static FlowSchedule read_csv(const std::filesystem::path& path);
  /// The built-in day of flows (two freeway branches, 24 hourly rows).
  static FlowSchedule bundled();
  /// The same rate in every hour.
  static FlowSchedule uniform(double total_vph);
};

struct Arrival {
  double time = 0.0;  ///< detector time T_k, s
  double gap = 0.0;   ///< X_k = T_k - T_{k-1}; the first gap is measured from 0
};

/// Piecewise-constant Poisson arrivals over [0, duration): the rate switches
/// exactly at multiples of 3600 s.
std::vector<Arrival> generate_arrivals(const FlowSchedule& schedule, std::uint64_t seed,
                                       double duration_s);

/// `count` arrivals of a stationary renewal process.
std::vector<Arrival> generate_renewal_arrivals(const ArrivalModel& model, std::uint64_t seed,
                                               std::size_t count);

}  // namespace platoon

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

#include "platoon/flow_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

constexpr double kHour = 3600.0;

// Hourly flows on the two freeway branches (veh/hour), midnight first.
constexpr HourlyFlow kBundled[24] = {
    {0, 254, 665},    {1, 249, 525},    {2, 210, 445},    {3, 206, 407},
    {4, 269, 687},    {5, 397, 1398},   {6, 693, 3164},   {7, 1221, 5498},
    {8, 1367, 5740},  {9, 1141, 4922},  {10, 1040, 4286}, {11, 946, 3993},
    {12, 1005, 4212}, {13, 1074, 4351}, {14, 1205, 5252}, {15, 1251, 5568},
    {16, 1374, 5711}, {17, 1340, 5783}, {18, 1351, 5677}, {19, 1150, 4989},
    {20, 845, 3696},  {21, 745, 2934},  {22, 582, 2233},  {23, 413, 1361},
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

void FlowSchedule::validate() const {
  if (hours.size() != 24) throw ConfigError("flow schedule needs exactly 24 hourly rows");
  for (std::size_t i = 0; i < hours.size(); ++i) {
    const auto& h = hours[i];
    if (h.hour != static_cast<int>(i)) {
      throw ConfigError("flow schedule rows must cover hours 0..23 in order");
    }
    if (!(h.flow1_vph >= 0.0) || !(h.flow2_vph >= 0.0) || !std::isfinite(h.flow1_vph) ||
        !std::isfinite(h.flow2_vph)) {
      throw ConfigError("flow schedule flows must be finite and non-negative");
    }
  }
  if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError("flow scale must lie in (0, 1]");
}

double FlowSchedule::rate(int hour) const {
  const auto& h = hours[static_cast<std::size_t>(((hour % 24) + 24) % 24)];
  return scale * (h.flow1_vph + h.flow2_vph) / kHour;
}

double FlowSchedule::average_flow_vph() const {
  double total = 0.0;
  for (const auto& h : hours) total += h.flow1_vph + h.flow2_vph;
  return scale * total / static_cast<double>(hours.size());
}

double FlowSchedule::scale_for_average(double target_vph) const {
  double total = 0.0;
  for (const auto& h : hours) total += h.flow1_vph + h.flow2_vph;
  if (!(total > 0.0)) throw ConfigError("flow schedule carries no traffic");
  return target_vph * static_cast<double>(hours.size()) / total;
}

FlowSchedule FlowSchedule::with_scale(double s) const {
  FlowSchedule copy = *this;
  copy.scale = s;
  copy.validate();
  return copy;
}

FlowSchedule FlowSchedule::read_csv(std::istream& in) {
  FlowSchedule schedule;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "hour,flow1_vph,flow2_vph") {
    throw ConfigError("flow schedule CSV must start with 'hour,flow1_vph,flow2_vph'");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
        std::getline(ss, extra, ',')) {
      throw ConfigError("flow schedule line " + std::to_string(line_no) +
                        " must have three fields");
    }
    try {
      schedule.hours.push_back({std::stoi(trim(a)), std::stod(trim(b)), std::stod(trim(c))});
    } catch (const std::exception&) {
      throw ConfigError("flow schedule line " + std::to_string(line_no) + " is not numeric");
    }
  }
  schedule.validate();
  return schedule;
}

FlowSchedule FlowSchedule::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open flow schedule '" + path.string() + "'");
  return read_csv(in);
}

FlowSchedule FlowSchedule::bundled() {
  FlowSchedule schedule;
  schedule.hours.assign(std::begin(kBundled), std::end(kBundled));
  return schedule;
}

FlowSchedule FlowSchedule::uniform(double total_vph) {
  FlowSchedule schedule;
  for (int h = 0; h < 24; ++h) schedule.hours.push_back({h, total_vph, 0.0});
  schedule.validate();
  return schedule;
}

std::vector<Arrival> generate_arrivals(const FlowSchedule& schedule, std::uint64_t seed,
                                       double duration_s) {
  schedule.validate();
  Rng rng(seed);
  std::vector<Arrival> arrivals;
  double t = 0.0;
  double last = 0.0;
  while (t < duration_s) {
    const double hour_index = std::floor(t / kHour);
    const double hour_end = std::min((hour_index + 1.0) * kHour, duration_s);
    const double r = schedule.rate(static_cast<int>(std::fmod(hour_index, 24.0)));
    if (r <= 0.0) {
      t = hour_end;
      continue;
    }
    const double candidate = t + rng.exponential(r);
    if (candidate >= hour_end) {
      // Memoryless: restart the clock at the boundary with the next rate.
      t = hour_end;
      continue;
    }
    t = candidate;
    arrivals.push_back({t, t - last});
    last = t;
  }
  return arrivals;
}

std::vector<Arrival> generate_renewal_arrivals(const ArrivalModel& model, std::uint64_t seed,
                                               std::size_t count) {
  Rng rng(seed);
  std::vector<Arrival> arrivals;
  arrivals.reserve(count);
  double t = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double gap = sample(model, rng);
    t += gap;
    arrivals.push_back({t, gap});
  }
  return arrivals;
}

}  // namespace platoon

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

#include "platoon/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace platoon {
namespace {

nlohmann::json optional_number(const std::optional<double>& value) {
  if (value && std::isfinite(*value)) return *value;
  return nullptr;
}

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const BviResult& result, bool include_values) {
  nlohmann::json j{{"solver", "bvi"},
                   {"theta", result.policy.theta},
                   {"c", result.policy.c},
                   {"Z", result.value.values.back()},
                   {"iterations", result.iterations},
                   {"wall_time_s", result.wall_time_s},
                   {"grid", result.value.grid.to_json()}};
  if (include_values) j["values"] = result.value.values;
  return j;
}

nlohmann::json to_json(const RaResult& result, bool include_values) {
  nlohmann::json j{{"solver", "ra"},
                   {"theta", result.policy.theta},
                   {"c", result.policy.c},
                   {"Z", result.z},
                   {"iterations", result.candidates},
                   {"selection_residual", result.selection_residual},
                   {"wall_time_s", result.wall_time_s},
                   {"grid", result.value.grid.to_json()}};
  if (include_values) j["values"] = result.value.values;
  return j;
}

nlohmann::json to_json(const SimulationResult& result) {
  const auto n = static_cast<double>(result.count());
  nlohmann::json sizes = nlohmann::json::object();
  for (const auto& [size, vehicles] : result.platoon_sizes) {
    sizes[std::to_string(size)] = vehicles;
  }
  return {{"policy", result.policy},
          {"seed", result.seed},
          {"rng", result.rng},
          {"vehicles", result.count()},
          {"total_cost", result.total_cost},
          {"total_fuel_L", result.total_fuel},
          {"total_time_s", result.total_time},
          {"AC", optional_number(result.average_cost)},
          {"AC_prime_per_km", optional_number(result.average_cost_per_km())},
          {"avg_fuel_L", n > 0 ? nlohmann::json(result.total_fuel / n) : nlohmann::json()},
          {"avg_time_s", n > 0 ? nlohmann::json(result.total_time / n) : nlohmann::json()},
          {"platoon_size_histogram", sizes},
          {"solves", result.solves}};
}

void write_vehicle_csv(std::ostream& out, const SimulationResult& result) {
  out << "k,T,X,S,U,merged,v_k,fuel_L,time_s,cost\n";
  for (const auto& v : result.vehicles) {
    out << v.k << ',' << number(v.t) << ',' << number(v.x) << ',' << number(v.s) << ','
        << number(v.u) << ',' << (v.merged ? 1 : 0) << ',' << number(v.speed) << ','
        << number(v.fuel()) << ',' << number(v.travel_time) << ',' << number(v.cost) << '\n';
  }
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string quoted = "\"";
  for (const char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

}  // namespace platoon

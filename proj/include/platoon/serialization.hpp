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
#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "platoon/dp_solvers.hpp"
#include "platoon/simulator.hpp"

namespace platoon {

nlohmann::json to_json(const BviResult& result, bool include_values = false);
nlohmann::json to_json(const RaResult& result, bool include_values = false);
/// Aggregates only; per-vehicle rows go to write_vehicle_csv.
nlohmann::json to_json(const SimulationResult& result);

/// Header "k,T,X,S,U,merged,v_k,fuel_L,time_s,cost" plus one row per vehicle.
void write_vehicle_csv(std::ostream& out, const SimulationResult& result);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace platoon

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
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace platoon {

struct Exponential {
  double rate = 0.0;  ///< vehicles per second
};

struct DiscreteAtom {
  double headway = 0.0;      ///< seconds
  double probability = 0.0;
};

struct DiscreteRandom {
  std::vector<DiscreteAtom> atoms;
};

struct Constant {
  double headway = 0.0;  ///< seconds
};

/**
 * Renewal inter-arrival distribution. Discrete and constant headways are point
 * masses; every integral against the density becomes a weighted sum for them.
 */
class ArrivalModel {
 public:
  using Variant = std::variant<Exponential, DiscreteRandom, Constant>;

  static ArrivalModel exponential(double rate);
  static ArrivalModel discrete(std::vector<DiscreteAtom> atoms);
  static ArrivalModel constant(double headway);

  /// {"type":"exponential","lambda":..} | {"type":"discrete","atoms":[[h,p],..]}
  /// | {"type":"constant","headway":..}
  static ArrivalModel from_json(const nlohmann::json& j);

  /// Short form used on the command line: "exponential:0.02",
  /// "discrete:15:0.4,8:0.6", "constant:10".
  static ArrivalModel parse(const std::string& text);

  nlohmann::json to_json() const;
  std::string name() const;

  const Variant& variant() const { return model_; }
  bool is_exponential() const { return std::holds_alternative<Exponential>(model_); }
  double rate() const;  ///< Exponential only.

  /// Density for the exponential, point mass at the atoms otherwise.
  double density(double x) const;
  /// P(X > x).
  double tail_mass(double x) const;
  double mean() const;

 private:
  explicit ArrivalModel(Variant v);
  Variant model_;
};

/**
 * Seedable generator used by every simulation draw. mt19937_64 with inversion
 * sampling so that streams are identical across standard libraries.
 */
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/inversion";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Exponential with the given rate.
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

double sample(const ArrivalModel& model, Rng& rng);

/**
 * Discounted headway estimator of the arrival rate over the last M
 * inter-arrival times:  1 / ((1 - beta) * sum_m beta^m X_{k-m}).
 * With fewer than M observations the sum runs over those available.
 */
class RateEstimator {
 public:
  RateEstimator(double beta, int m_steps);

  void observe(double headway);
  /// Throws std::logic_error before the first observation.
  double estimate() const;

  std::size_t count() const { return count_; }
  double beta() const { return beta_; }
  int window() const { return static_cast<int>(buffer_.size()); }

 private:
  double beta_;
  std::vector<double> buffer_;  // ring buffer, newest at head_ - 1
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

}  // namespace platoon

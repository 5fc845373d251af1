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

#include "platoon/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kAtomTolerance = 1e-12;

double parse_number(const std::string& token, const std::string& context) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + token + "' in " + context);
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

ArrivalModel::ArrivalModel(Variant v) : model_(std::move(v)) {}

ArrivalModel ArrivalModel::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("exponential arrival rate must be positive");
  }
  return ArrivalModel(Exponential{rate});
}

ArrivalModel ArrivalModel::discrete(std::vector<DiscreteAtom> atoms) {
  if (atoms.empty()) throw ConfigError("discrete arrival model needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.headway > 0.0) || !std::isfinite(a.headway)) {
      throw ConfigError("discrete headways must be positive");
    }
    if (!(a.probability > 0.0)) throw ConfigError("discrete probabilities must be positive");
    total += a.probability;
  }
  if (std::abs(total - 1.0) > kAtomTolerance) {
    throw ConfigError("discrete probabilities must sum to 1");
  }
  return ArrivalModel(DiscreteRandom{std::move(atoms)});
}

ArrivalModel ArrivalModel::constant(double headway) {
  if (!(headway > 0.0) || !std::isfinite(headway)) {
    throw ConfigError("constant headway must be positive");
  }
  return ArrivalModel(Constant{headway});
}

ArrivalModel ArrivalModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ConfigError("arrival model JSON needs a string 'type'");
  }
  const auto type = j["type"].get<std::string>();
  try {
    if (type == "exponential") return exponential(j.at("lambda").get<double>());
    if (type == "constant") return constant(j.at("headway").get<double>());
    if (type == "discrete") {
      std::vector<DiscreteAtom> atoms;
      for (const auto& pair : j.at("atoms")) {
        if (!pair.is_array() || pair.size() != 2) {
          throw ConfigError("discrete atoms must be [headway, probability] pairs");
        }
        atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
      return discrete(std::move(atoms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed arrival model: ") + e.what());
  }
  throw ConfigError("unknown arrival model type '" + type + "'");
}

ArrivalModel ArrivalModel::parse(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed arrival model JSON: ") + e.what());
    }
    return from_json(j);
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("arrival model '" + text + "' must look like type:parameters");
  }
  const auto type = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (type == "exponential") return exponential(parse_number(rest, text));
  if (type == "constant") return constant(parse_number(rest, text));
  if (type == "discrete") {
    std::vector<DiscreteAtom> atoms;
    for (const auto& item : split(rest, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) throw ConfigError("discrete atom '" + item + "' must be h:p");
      atoms.push_back({parse_number(parts[0], text), parse_number(parts[1], text)});
    }
    return discrete(std::move(atoms));
  }
  throw ConfigError("unknown arrival model type '" + type + "'");
}

nlohmann::json ArrivalModel::to_json() const {
  return std::visit(
      Overloaded{
          [](const Exponential& e) -> nlohmann::json {
            return {{"type", "exponential"}, {"lambda", e.rate}};
          },
          [](const DiscreteRandom& d) -> nlohmann::json {
            auto atoms = nlohmann::json::array();
            for (const auto& a : d.atoms) atoms.push_back({a.headway, a.probability});
            return {{"type", "discrete"}, {"atoms", atoms}};
          },
          [](const Constant& c) -> nlohmann::json {
            return {{"type", "constant"}, {"headway", c.headway}};
          }},
      model_);
}

std::string ArrivalModel::name() const {
  return std::visit(Overloaded{[](const Exponential&) { return std::string("exponential"); },
                               [](const DiscreteRandom&) { return std::string("discrete"); },
                               [](const Constant&) { return std::string("constant"); }},
                    model_);
}

double ArrivalModel::rate() const {
  if (const auto* e = std::get_if<Exponential>(&model_)) return e->rate;
  throw ConfigError("arrival model '" + name() + "' has no exponential rate");
}

double ArrivalModel::density(double x) const {
  if (x < 0.0) return 0.0;
  return std::visit(
      Overloaded{[x](const Exponential& e) { return e.rate * std::exp(-e.rate * x); },
                 [x](const DiscreteRandom& d) {
                   double mass = 0.0;
                   for (const auto& a : d.atoms) {
                     if (a.headway == x) mass += a.probability;
                   }
                   return mass;
                 },
                 [x](const Constant& c) { return c.headway == x ? 1.0 : 0.0; }},
      model_);
}

double ArrivalModel::tail_mass(double x) const {
  if (x < 0.0) return 1.0;
  return std::visit(
      Overloaded{[x](const Exponential& e) { return std::exp(-e.rate * x); },
                 [x](const DiscreteRandom& d) {
                   double mass = 0.0;
                   for (const auto& a : d.atoms) {
                     if (a.headway > x) mass += a.probability;
                   }
                   return mass;
                 },
                 [x](const Constant& c) { return c.headway > x ? 1.0 : 0.0; }},
      model_);
}

double ArrivalModel::mean() const {
  return std::visit(Overloaded{[](const Exponential& e) { return 1.0 / e.rate; },
                               [](const DiscreteRandom& d) {
                                 double m = 0.0;
                                 for (const auto& a : d.atoms) m += a.headway * a.probability;
                                 return m;
                               },
                               [](const Constant& c) { return c.headway; }},
                    model_);
}

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

double sample(const ArrivalModel& model, Rng& rng) {
  return std::visit(Overloaded{[&](const Exponential& e) { return rng.exponential(e.rate); },
                               [&](const DiscreteRandom& d) {
                                 const double u = rng.uniform();
                                 double cumulative = 0.0;
                                 for (const auto& a : d.atoms) {
                                   cumulative += a.probability;
                                   if (u < cumulative) return a.headway;
                                 }
                                 return d.atoms.back().headway;
                               },
                               [](const Constant& c) { return c.headway; }},
                    model.variant());
}

RateEstimator::RateEstimator(double beta, int m_steps) : beta_(beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("estimator beta must lie in (0, 1)");
  if (m_steps < 1) throw ConfigError("estimator window M must be at least 1");
  buffer_.assign(static_cast<std::size_t>(m_steps), 0.0);
}

void RateEstimator::observe(double headway) {
  buffer_[head_] = headway;
  head_ = (head_ + 1) % buffer_.size();
  ++count_;
}

double RateEstimator::estimate() const {
  if (count_ == 0) throw std::logic_error("RateEstimator: no observed headways");
  const std::size_t n = std::min(count_, buffer_.size());
  double sum = 0.0;
  double weight = 1.0;
  std::size_t idx = head_;
  for (std::size_t m = 0; m < n; ++m) {
    idx = (idx == 0 ? buffer_.size() : idx) - 1;
    sum += weight * buffer_[idx];
    weight *= beta_;
  }
  if (!(sum > 0.0)) throw NumericalError("RateEstimator: headway sum is not positive");
  return 1.0 / ((1.0 - beta_) * sum);
}

}  // namespace platoon

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

#include "platoon/cost_model.hpp"

#include <cmath>
#include <string>

#include "json.hpp"

#include "platoon/errors.hpp"

namespace platoon {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("cost parameter '") + name +
                      "' must be positive and finite");
  }
}

void require_unit_interval(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    throw ConfigError(std::string("cost parameter '") + name +
                      "' must lie in (0, 1)");
  }
}

void check_domain(double s, const CostParams& p, const char* what) {
  if (!(s <= p.t0() - kSingularityGuard)) {
    throw DomainError(std::string(what) + ": argument " + std::to_string(s) +
                      " is not below t0 = " + std::to_string(p.t0()));
  }
}

// Realized coordinating-zone speed ratio d1 / (d1/v - s).
double zone_speed(double s, const CostParams& p) { return p.d1 / (p.t0() - s); }

double unchecked_merge(double s, const CostParams& p) {
  const double vk = zone_speed(s, p);
  return p.w1 * s + p.w2 * (p.alpha * p.d1 * p.v * p.v -
                            p.alpha * p.d1 * vk * vk + p.eta * p.phi * p.d2);
}

double unchecked_merge_derivative(double s, const CostParams& p) {
  const double vk = zone_speed(s, p);
  return p.w1 - 2.0 * p.w2 * p.alpha * vk * vk * vk;
}

// Bisection on a bracket with f(lo) and f(hi) of opposite sign.
template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void CostParams::validate() const {
  require_positive(w1, "w1");
  require_positive(w2, "w2");
  require_positive(alpha, "alpha");
  require_positive(phi, "phi");
  require_positive(v, "v");
  require_positive(d1, "d1");
  require_positive(d2, "d2");
  require_unit_interval(eta, "eta");
  require_unit_interval(gamma, "gamma");
  if (!std::isfinite(t0()) || !(t0() > 0.0)) {
    throw ConfigError("t0 = d1 / v must be finite and positive");
  }
}

CostParams CostParams::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("cost parameters must be a JSON object");
  static const char* const kKeys[] = {"w1_per_hour", "w2_per_liter", "alpha",
                                      "eta",         "phi_l_per_100km",
                                      "v_mps",       "d1_km",        "d2_km",
                                      "gamma"};
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) throw ConfigError("unknown cost parameter key '" + key + "'");
    if (!value.is_number()) {
      throw ConfigError("cost parameter '" + key + "' must be a number");
    }
  }
  CostParams p;
  if (j.contains("w1_per_hour")) p.w1 = j["w1_per_hour"].get<double>() / 3600.0;
  if (j.contains("w2_per_liter")) p.w2 = j["w2_per_liter"].get<double>();
  if (j.contains("alpha")) p.alpha = j["alpha"].get<double>();
  if (j.contains("eta")) p.eta = j["eta"].get<double>();
  if (j.contains("phi_l_per_100km")) p.phi = j["phi_l_per_100km"].get<double>() / 1e5;
  if (j.contains("v_mps")) p.v = j["v_mps"].get<double>();
  if (j.contains("d1_km")) p.d1 = j["d1_km"].get<double>() * 1000.0;
  if (j.contains("d2_km")) p.d2 = j["d2_km"].get<double>() * 1000.0;
  if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
  p.validate();
  return p;
}

nlohmann::json CostParams::to_json() const {
  return {{"w1_per_hour", w1 * 3600.0}, {"w2_per_liter", w2},
          {"alpha", alpha},             {"eta", eta},
          {"phi_l_per_100km", phi * 1e5}, {"v_mps", v},
          {"d1_km", d1 / 1000.0},       {"d2_km", d2 / 1000.0},
          {"gamma", gamma}};
}

double platoon_bonus(const CostParams& p) { return p.w2 * p.eta * p.phi * p.d2; }

double reward_merge(double s, const CostParams& p) {
  check_domain(s, p, "reward_merge");
  return unchecked_merge(s, p);
}

double reward_cruise(double a, const CostParams& p) {
  check_domain(a, p, "reward_cruise");
  return unchecked_merge(a, p) - platoon_bonus(p);
}

double reward(double s, double a, const CostParams& p) {
  const double t0 = p.t0();
  if (s < t0) {
    if (a > s) throw DomainError("reward: action exceeds the predicted headway");
    if (a == s) return reward_merge(s, p);
  }
  return reward_cruise(a, p);
}

double reward_merge_derivative(double s, const CostParams& p) {
  check_domain(s, p, "reward_merge_derivative");
  return unchecked_merge_derivative(s, p);
}

CostConstants compute_constants(const CostParams& p) {
  p.validate();
  CostConstants k;
  k.t0 = p.t0();
  k.g0 = platoon_bonus(p);
  k.c_n = p.d1 * (1.0 / p.v - std::cbrt(2.0 * p.w2 * p.alpha / p.w1));

  const double level = unchecked_merge(k.c_n, p) - k.g0;
  auto excess = [&](double s) { return unchecked_merge(s, p) - level; };

  constexpr double kDelta = 1e-6;
  constexpr double kTol = 1e-9;
  const double hi = k.t0 - kDelta;
  if (!(excess(k.c_n + kDelta) > 0.0) || !(excess(hi) < 0.0)) {
    throw NumericalError("compute_constants: no bracket for theta_n");
  }
  k.theta_n = bisect(excess, k.c_n + kDelta, hi, kTol);

  double width = 1.0;
  double lo = k.c_n - width;
  while (excess(lo) > 0.0) {
    width *= 2.0;
    lo = k.c_n - width;
    if (width > 1e12) throw NumericalError("compute_constants: no bracket for theta_n_prime");
  }
  k.theta_n_prime = bisect(excess, lo, k.c_n - kDelta, kTol);
  return k;
}

}  // namespace platoon

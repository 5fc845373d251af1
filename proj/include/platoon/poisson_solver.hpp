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

#include <optional>
#include <string>

#include "json.hpp"
#include "platoon/cost_model.hpp"
#include "platoon/errors.hpp"

namespace platoon {

/// Threshold policy under Poisson arrivals from the integral-equation system.
struct PoissonSolution {
  double theta = 0.0;
  double c = 0.0;
  double z = 0.0;       ///< plateau value G(theta) / (1 - gamma)
  double lambda = 0.0;  ///< arrival rate, veh/s
  double residual_norm = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
};

struct PoissonResiduals {
  double r1 = 0.0;  ///< value-matching at theta, currency
  double r2 = 0.0;  ///< stationarity of V at c, currency / s
};

/// Residuals of the system after eliminating Z = G(theta) / (1 - gamma).
/// Throws DomainError if theta or c is not below t0.
PoissonResiduals poisson_residuals(double theta, double c, double lambda, const CostParams& p,
                                   const CostConstants& consts);

struct PoissonStart {
  double theta = 0.0;
  double c = 0.0;
};

struct PoissonOptions {
  double tolerance = 1e-10;  ///< on hypot(r1, r2) / max(1, |Z|)
  int max_iterations = 200;
  int max_halvings = 30;
};

/// Raised when Newton stops without meeting the tolerance; carries the last
/// iterate so callers can inspect or restart from it.
class PoissonConvergenceError : public NumericalError {
 public:
  PoissonConvergenceError(const std::string& what, PoissonStart last)
      : NumericalError(what), last_(last) {}
  PoissonStart last_iterate() const { return last_; }

 private:
  PoissonStart last_;
};

/// The cold start just inside the proven bounds.
PoissonStart default_start(const CostConstants& consts);

/// Damped Newton with a central-difference Jacobian. The result is checked
/// against theta_n_prime <= c <= c_n <= theta <= theta_n.
PoissonSolution solve_poisson(double lambda, const CostParams& p, const CostConstants& consts,
                              std::optional<PoissonStart> init = std::nullopt,
                              const PoissonOptions& options = {});

/// Closed-form optimal value function for s <= theta; Z above theta.
/// Throws DomainError for s >= t0.
double closed_form_value(double s, const PoissonSolution& sol, const CostParams& p,
                         const CostConstants& consts);

nlohmann::json to_json(const PoissonSolution& sol);

}  // namespace platoon

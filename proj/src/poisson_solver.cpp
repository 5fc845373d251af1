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

#include "platoon/poisson_solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace platoon {
namespace {

constexpr double kBoundSlack = 1e-6;

// Integral of exp(mu (upper - t)) (G'(t) - lambda G(t)) over [lower, upper].
// Written relative to the upper limit so no factor overflows.
double ode_integral(double lower, double upper, double lambda, double mu, double scale,
                    const CostParams& p) {
  auto integrand = [&](double t) {
    return std::exp(mu * (upper - t)) *
           (reward_merge_derivative(t, p) - lambda * reward_merge(t, p));
  };
  if (lower == upper) return 0.0;
  if (lower > upper) return -ode_integral(upper, lower, lambda, mu, scale, p);
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, lower, upper, 12, 1e-13, &error, &l1);
  // Absolute target 1e-12 (1 + |Z|), floored at what rounding allows.
  if (!(error <= std::max(1e-12 * scale, 1e-14 * l1))) {
    throw NumericalError("poisson_residuals: quadrature did not reach tolerance");
  }
  return value;
}

double scaled_norm(const PoissonResiduals& r, double z) {
  return std::hypot(r.r1, r.r2) / std::max(1.0, std::abs(z));
}

bool in_domain(double theta, double c, double t0) {
  return theta <= t0 - 1e-6 && c < theta;
}

}  // namespace

PoissonResiduals poisson_residuals(double theta, double c, double lambda, const CostParams& p,
                                   const CostConstants& consts) {
  if (!(theta <= consts.t0 - kSingularityGuard) || !(c <= consts.t0 - kSingularityGuard)) {
    throw DomainError("poisson_residuals: theta and c must be below t0");
  }
  const double g = p.gamma;
  const double mu = lambda * (1.0 - g);
  const double z = reward_merge(theta, p) / (1.0 - g);
  const double peak = z + consts.g0;
  const double integral = ode_integral(c, theta, lambda, mu, 1.0 + std::abs(z), p);
  PoissonResiduals r;
  r.r1 = z - integral - peak * std::exp(mu * (theta - c));
  r.r2 = reward_merge_derivative(c, p) - lambda * reward_merge(c, p) + mu * peak;
  return r;
}

PoissonStart default_start(const CostConstants& consts) {
  return {consts.theta_n - 0.1, consts.c_n - 0.1};
}

PoissonSolution solve_poisson(double lambda, const CostParams& p, const CostConstants& consts,
                              std::optional<PoissonStart> init, const PoissonOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("solve_poisson: lambda must be positive");
  }
  const auto start_time = std::chrono::steady_clock::now();
  const double t0 = consts.t0;
  const double lower_fence = consts.theta_n_prime - 50.0;

  std::array<double, 2> x{init ? init->theta : consts.theta_n - 0.1,
                          init ? init->c : consts.c_n - 0.1};
  if (!in_domain(x[0], x[1], t0)) x = {consts.theta_n - 0.1, consts.c_n - 0.1};

  auto eval = [&](const std::array<double, 2>& y) {
    return poisson_residuals(y[0], y[1], lambda, p, consts);
  };
  auto z_of = [&](double theta) { return reward_merge(theta, p) / (1.0 - p.gamma); };

  PoissonResiduals r = eval(x);
  double norm = scaled_norm(r, z_of(x[0]));
  int it = 0;
  while (norm > options.tolerance) {
    if (it >= options.max_iterations) {
      throw PoissonConvergenceError("solve_poisson: no convergence after " +
                                        std::to_string(it) + " iterations (residual " +
                                        std::to_string(norm) + ")",
                                    {x[0], x[1]});
    }
    ++it;

    // Central-difference Jacobian, columns d/dtheta and d/dc.
    std::array<std::array<double, 2>, 2> jac{};
    for (int k = 0; k < 2; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
      auto plus = x;
      auto minus = x;
      plus[k] += h;
      minus[k] -= h;
      const auto rp = eval(plus);
      const auto rm = eval(minus);
      jac[0][k] = (rp.r1 - rm.r1) / (2.0 * h);
      jac[1][k] = (rp.r2 - rm.r2) / (2.0 * h);
    }
    const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if (!std::isfinite(det) || det == 0.0) {
      throw PoissonConvergenceError("solve_poisson: singular Jacobian", {x[0], x[1]});
    }
    const std::array<double, 2> dx{(-r.r1 * jac[1][1] + r.r2 * jac[0][1]) / det,
                                   (-r.r2 * jac[0][0] + r.r1 * jac[1][0]) / det};

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving, step *= 0.5) {
      const std::array<double, 2> trial{x[0] + step * dx[0], x[1] + step * dx[1]};
      if (!in_domain(trial[0], trial[1], t0)) continue;
      const auto rt = eval(trial);
      const double nt = scaled_norm(rt, z_of(trial[0]));
      if (nt < norm) {
        x = trial;
        r = rt;
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw PoissonConvergenceError("solve_poisson: line search failed (residual " +
                                        std::to_string(norm) + ")",
                                    {x[0], x[1]});
    }
    if (x[1] <= lower_fence || x[0] >= t0) {
      throw PoissonConvergenceError("solve_poisson: iterate left the admissible bracket",
                                    {x[0], x[1]});
    }
  }

  PoissonSolution sol;
  sol.theta = x[0];
  sol.c = x[1];
  sol.z = z_of(x[0]);
  sol.lambda = lambda;
  sol.residual_norm = norm;
  sol.iterations = it;
  sol.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();

  if (sol.c < consts.theta_n_prime - kBoundSlack || sol.c > consts.c_n + kBoundSlack ||
      sol.theta < consts.c_n - kBoundSlack || sol.theta > consts.theta_n + kBoundSlack) {
    throw PoissonConvergenceError("solve_poisson: root lies outside the proven bounds",
                                  {sol.theta, sol.c});
  }
  return sol;
}

double closed_form_value(double s, const PoissonSolution& sol, const CostParams& p,
                         const CostConstants& consts) {
  if (!(s <= consts.t0 - kSingularityGuard)) {
    throw DomainError("closed_form_value: s must be below t0");
  }
  if (s > sol.theta) return sol.z;
  const double mu = sol.lambda * (1.0 - p.gamma);
  const double integral =
      ode_integral(sol.c, s, sol.lambda, mu, 1.0 + std::abs(sol.z), p);
  return integral + (sol.z + consts.g0) * std::exp(mu * (s - sol.c));
}

nlohmann::json to_json(const PoissonSolution& sol) {
  return {{"theta", sol.theta},
          {"c", sol.c},
          {"Z", sol.z},
          {"lambda", sol.lambda},
          {"residual_norm", sol.residual_norm},
          {"iterations", sol.iterations},
          {"wall_time_s", sol.wall_time_s}};
}

}  // namespace platoon

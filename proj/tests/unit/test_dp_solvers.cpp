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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "platoon/dp_solvers.hpp"
#include "platoon/errors.hpp"
#include "platoon/poisson_solver.hpp"
#include "platoon/serialization.hpp"
#include "support/simpson.hpp"

using namespace platoon;

namespace {

ValueFunction filled(const StateGrid& grid, double (*f)(double)) {
  ValueFunction vf{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) vf.values[i] = f(grid.node(i));
  return vf;
}

const CostParams kParams;
const CostConstants kConsts = compute_constants(kParams);

}  // namespace

TEST_CASE("state grid") {
  StateGrid g(-100, 400, 0.25);
  CHECK(g.size() == 2001);
  CHECK(g.node(0) == -100.0);
  CHECK(g.node(2000) == 400.0);
  CHECK(g.index_of(24.5) == 498);
  CHECK_THROWS_AS(g.index_of(24.6), DomainError);
  CHECK(g.floor_index(24.6) == 498);
  CHECK(g.floor_index(-1000) == 0);
  CHECK(g.contains(400.0));
  CHECK_FALSE(g.contains(400.1));
  CHECK_THROWS_AS(StateGrid(0, -1, 1), ConfigError);
  CHECK_THROWS_AS(StateGrid(0, 1, 0.3), ConfigError);
  CHECK_THROWS_AS(StateGrid(0, 1, 0), ConfigError);
  CHECK_NOTHROW(g.require_brackets(kConsts));
  CHECK_THROWS_AS(StateGrid(0, 100, 1).require_brackets(kConsts), ConfigError);
  CHECK_THROWS_AS(StateGrid(-10, 20, 1).require_brackets(kConsts), ConfigError);
}

TEST_CASE("value function interpolation") {
  StateGrid g(0, 4, 1);
  ValueFunction vf{g, {0, 2, 4, 6, 8}};
  CHECK(vf.at(1.5) == doctest::Approx(3.0));
  CHECK(vf.at(4.0) == 8.0);
  CHECK(vf.at(10.0) == 8.0);
  CHECK(vf.at(-0.5) == 0.0);
}

TEST_CASE("expectation of a constant is the constant") {
  StateGrid g(-10, 50, 0.5);
  ValueFunction vf{g, std::vector<double>(g.size(), 3.25)};
  for (const auto& model :
       {ArrivalModel::exponential(0.02), ArrivalModel::exponential(2.0),
        ArrivalModel::constant(10), ArrivalModel::discrete({{15, 0.4}, {8, 0.6}})}) {
    for (double a : {-10.0, -3.3, 0.0, 17.25, 49.9, 50.0}) {
      CHECK(expected_value(vf, a, model) == doctest::Approx(3.25).epsilon(1e-12));
    }
    TransitionKernel kernel(g, model);
    for (std::size_t i = 0; i < g.size(); i += 7) {
      CHECK(kernel.expectation(vf.values, i) == doctest::Approx(3.25).epsilon(1e-12));
    }
  }
}

TEST_CASE("point masses read the interpolated value") {
  StateGrid g(0, 40, 1);
  auto vf = filled(g, [](double s) { return std::sin(s / 5.0); });
  CHECK(expected_value(vf, 3.0, ArrivalModel::constant(10)) == doctest::Approx(vf.at(13.0)));
  CHECK(expected_value(vf, 3.5, ArrivalModel::constant(10)) == doctest::Approx(vf.at(13.5)));
  CHECK(expected_value(vf, 35.0, ArrivalModel::constant(10)) == doctest::Approx(vf.values.back()));
  const auto d = ArrivalModel::discrete({{15, 0.4}, {8, 0.6}});
  CHECK(expected_value(vf, 2.25, d) ==
        doctest::Approx(0.4 * vf.at(17.25) + 0.6 * vf.at(10.25)));
}

TEST_CASE("exponential expectation against a Simpson oracle") {
  StateGrid g(0, 400, 0.25);
  auto vf = filled(g, [](double s) { return s; });
  const double lambda = 0.02;
  const auto model = ArrivalModel::exponential(lambda);
  auto integrand = [&](double x) { return lambda * std::exp(-lambda * x) * x; };
  const double oracle = testing::adaptive_simpson(integrand, 0.0, 400.0, 1e-12) +
                        std::exp(-lambda * 400.0) * 400.0;
  CHECK(std::abs(expected_value(vf, 0.0, model) / oracle - 1.0) <= 1e-3);

  // A curved value function on a coarser grid still lands within 0.1%.
  StateGrid coarse(-100, 400, 1.0);
  auto curved = filled(coarse, [](double s) { return 5.0 + std::cos(s / 20.0); });
  auto f2 = [&](double x) {
    return lambda * std::exp(-lambda * x) * (5.0 + std::cos((-30.0 + x) / 20.0));
  };
  const double oracle2 = testing::adaptive_simpson(f2, 0.0, 430.0, 1e-12) +
                         std::exp(-lambda * 430.0) * curved.values.back();
  CHECK(std::abs(expected_value(curved, -30.0, model) / oracle2 - 1.0) <= 1e-3);
}

TEST_CASE("kernel fast path equals the generic route") {
  StateGrid g(-20, 60, 0.5);
  auto vf = filled(g, [](double s) { return std::exp(-s / 30.0) + 0.01 * s; });
  for (const auto& model : {ArrivalModel::exponential(0.05), ArrivalModel::constant(7.5),
                            ArrivalModel::constant(7.3),
                            ArrivalModel::discrete({{15, 0.4}, {8, 0.6}})}) {
    TransitionKernel kernel(g, model);
    for (std::size_t i = 0; i < g.size(); ++i) {
      REQUIRE(kernel.expectation(vf.values, i) ==
              doctest::Approx(expected_value(vf, g.node(i), model)).epsilon(1e-12));
    }
  }
}

TEST_CASE("expected value rejects actions off the grid") {
  StateGrid g(0, 10, 1);
  ValueFunction vf{g, std::vector<double>(g.size(), 0.0)};
  CHECK_THROWS_AS(expected_value(vf, -1.0, ArrivalModel::constant(1)), DomainError);
  CHECK_THROWS_AS(expected_value(vf, 11.0, ArrivalModel::constant(1)), DomainError);
}

TEST_CASE("one-stage backups reproduce the static threshold") {
  const auto grid = StateGrid::nominal();
  ValueFunction zero{grid, std::vector<double>(grid.size(), 0.0)};
  const auto model = ArrivalModel::exponential(0.02);
  for (double s = -100.0; s <= 60.0; s += 0.25) {
    const auto b = bellman_backup(zero, s, model, kParams, kConsts);
    if (s >= kConsts.t0) {
      CHECK_FALSE(b.merged);
    } else {
      CHECK(b.merged == (s <= kConsts.theta_n));
    }
    if (!b.merged) {
      CHECK(std::abs(b.best_action - kConsts.c_n) <= grid.step());
    }
  }
  CHECK_FALSE(bellman_backup(zero, 300.0, model, kParams, kConsts).merged);
}

TEST_CASE("bvi on the nominal grid") {
  const auto grid = StateGrid::nominal();
  for (const auto& model : {ArrivalModel::constant(10), ArrivalModel::exponential(0.02)}) {
    const auto r = solve_bvi(grid, model, kParams, kConsts);
    CHECK(count_switches(r.greedy) == 1);
    CHECK(r.policy.theta >= kConsts.c_n - grid.step());
    CHECK(r.policy.theta <= kConsts.theta_n + grid.step());
    CHECK(r.policy.c >= kConsts.theta_n_prime - grid.step());
    CHECK(r.policy.c <= kConsts.c_n + grid.step());
    for (std::size_t i = 0; grid.node(i) < kConsts.c_n; ++i) REQUIRE(r.greedy.merged[i]);
    // The cruise action is the same everywhere above the threshold.
    for (std::size_t i = grid.index_of(r.policy.theta) + 1; i < grid.size(); ++i) {
      REQUIRE(!r.greedy.merged[i]);
      REQUIRE(r.greedy.action[i] == r.policy.c);
    }
  }
}

TEST_CASE("bvi enforces the sweep cap") {
  BviOptions options;
  options.max_sweeps = 3;
  CHECK_THROWS_AS(
      solve_bvi(StateGrid(-50, 150, 1), ArrivalModel::exponential(0.02), kParams, kConsts, options),
      NumericalError);
}

TEST_CASE("ra agrees with bvi and the closed form") {
  const auto grid = StateGrid::nominal();
  SUBCASE("constant headway") {
    const auto model = ArrivalModel::constant(10);
    const auto ra = solve_ra(grid, model, kParams, kConsts);
    const auto bvi = solve_bvi(grid, model, kParams, kConsts);
    CHECK(std::abs(ra.policy.theta - bvi.policy.theta) <= grid.step() + 1e-9);
    CHECK(std::abs(ra.policy.c - bvi.policy.c) <= grid.step() + 1e-9);
  }
  SUBCASE("exponential") {
    const auto ra = solve_ra(grid, ArrivalModel::exponential(0.02), kParams, kConsts);
    const auto sol = solve_poisson(0.02, kParams, kConsts);
    CHECK(std::abs(ra.policy.theta - sol.theta) <= 2 * grid.step());
    CHECK(std::abs(ra.policy.c - sol.c) <= 2 * grid.step());
    CHECK(ra.z == doctest::Approx(reward_merge(ra.policy.theta, kParams) / (1 - kParams.gamma)));
    // V(c) = Z + g0 up to the selection residual.
    const double vc = ra.value.at(ra.policy.c);
    CHECK(std::abs(vc - (ra.z + kConsts.g0)) <= ra.selection_residual + 1e-12);
  }
  SUBCASE("extrapolated zero offset lands on the same policy") {
    const auto model = ArrivalModel::exponential(0.02);
    const auto a = solve_ra(grid, model, kParams, kConsts);
    const auto b = solve_ra(grid, model, kParams, kConsts, RaOptions{ZeroOffset::kExtrapolate});
    CHECK(std::abs(a.policy.theta - b.policy.theta) <= grid.step());
    CHECK(std::abs(a.policy.c - b.policy.c) <= grid.step());
  }
}

TEST_CASE("vanishing discount gives the one-stage policy") {
  CostParams p;
  p.gamma = 1e-6;
  const auto k = compute_constants(p);
  const auto grid = StateGrid::nominal();
  const auto model = ArrivalModel::exponential(0.02);
  const auto bvi = solve_bvi(grid, model, p, k);
  const auto ra = solve_ra(grid, model, p, k);
  for (const auto& pol : {bvi.policy, ra.policy}) {
    CHECK(std::abs(pol.theta - k.theta_n) <= grid.step());
    CHECK(std::abs(pol.c - k.c_n) <= grid.step());
  }
}

TEST_CASE("solver results serialize") {
  const StateGrid grid(-50, 150, 1);
  const auto r = solve_bvi(grid, ArrivalModel::constant(10), kParams, kConsts);
  const auto j = to_json(r, true);
  CHECK(j.at("solver") == "bvi");
  CHECK(j.at("theta") == r.policy.theta);
  CHECK(j.at("values").size() == grid.size());
  CHECK(j.at("grid").at("step") == 1.0);
  CHECK(j.contains("Z"));
  CHECK_FALSE(to_json(r).contains("values"));
  const auto ra = to_json(solve_ra(grid, ArrivalModel::constant(10), kParams, kConsts));
  CHECK(ra.at("solver") == "ra");
  CHECK(ra.contains("selection_residual"));
}

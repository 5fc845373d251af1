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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "platoon/dp_solvers.hpp"
#include "platoon/poisson_solver.hpp"
#include "platoon/simulator.hpp"

using namespace platoon;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int failures = 0;

void report(int id, const char* title, const Verdict& v) {
  std::printf("criterion %2d %s: %s -- %s\n", id, v.ok ? "PASS" : "FAIL", title, v.detail.c_str());
  std::fflush(stdout);
  if (!v.ok) ++failures;
}

// Runs f and reports it as a failure if it throws.
void run(int id, const char* title, const std::function<Verdict()>& f) {
  try {
    report(id, title, f());
  } catch (const std::exception& e) {
    Verdict v;
    v.expect(false, std::string("exception: ") + e.what());
    report(id, title, v);
  }
}

const CostParams kParams;

std::vector<std::pair<std::string, ArrivalModel>> structure_models() {
  return {{"exponential 0.01", ArrivalModel::exponential(0.01)},
          {"exponential 0.02", ArrivalModel::exponential(0.02)},
          {"exponential 0.05", ArrivalModel::exponential(0.05)},
          {"discrete", ArrivalModel::discrete({{15, 0.4}, {8, 0.6}})},
          {"constant 10", ArrivalModel::constant(10)}};
}

// Minimum wall time of `repeats` runs.
double min_time(const std::function<void()>& f, int repeats) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto t = Clock::now();
    f();
    best = std::min(best, since(t));
  }
  return best;
}

Verdict constants() {
  Verdict v;
  const auto t = Clock::now();
  const auto k = compute_constants(kParams);
  const double elapsed = since(t);
  v.expect(std::abs(k.c_n - (-0.49)) <= 0.01, fmt("c_n = %.4f", k.c_n));
  v.expect(std::abs(k.theta_n - 27.5) <= 0.3, fmt("theta_n = %.4f", k.theta_n));
  v.expect(elapsed < 1.0, fmt("runtime %.3f s", elapsed));
  v.note(fmt("c_n=%.4f theta_n=%.4f in %.2e s", k.c_n, k.theta_n, elapsed));
  return v;
}

Verdict cross_solver() {
  Verdict v;
  const auto k = compute_constants(kParams);
  const auto model = ArrivalModel::exponential(0.02);
  const auto full = StateGrid::nominal();
  const auto bvi = solve_bvi(full, model, kParams, k).policy;
  const auto ra = solve_ra(full, model, kParams, k).policy;
  const auto pr = solve_poisson(0.02, kParams, k);
  const std::vector<std::pair<const char*, ThresholdPolicy>> all = {
      {"bvi", bvi}, {"ra", ra}, {"poisson", {pr.theta, pr.c}}};
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double dt = std::abs(all[i].second.theta - all[j].second.theta);
      const double dc = std::abs(all[i].second.c - all[j].second.c);
      v.expect(dt <= 0.5 && dc <= 0.5, std::string(all[i].first) + " vs " + all[j].first +
                                           fmt(" differ by (%.3f, %.3f)", dt, dc));
    }
  }
  v.note(fmt("bvi (%.2f, %.2f)", bvi.theta, bvi.c) + fmt(" ra (%.2f, %.2f)", ra.theta, ra.c) +
         fmt(" poisson (%.4f, %.4f)", pr.theta, pr.c));

  const auto t = Clock::now();
  const StateGrid reduced(-50, 150, 1.0);
  solve_bvi(reduced, model, kParams, k);
  solve_ra(reduced, model, kParams, k);
  solve_poisson(0.02, kParams, k);
  const double elapsed = since(t);
  v.expect(elapsed < 600.0, fmt("reduced grid took %.1f s", elapsed));
  v.note(fmt("reduced grid total %.4f s", elapsed));
  return v;
}

Verdict timing() {
  Verdict v;
  const auto k = compute_constants(kParams);
  const StateGrid grid(-50, 150, 1.0);
  const int repeats = 7;
  for (const auto& [name, model] : structure_models()) {
    if (name == "exponential 0.01" || name == "exponential 0.05") continue;
    const double t_bvi = min_time([&] { solve_bvi(grid, model, kParams, k); }, repeats);
    const double t_ra = min_time([&] { solve_ra(grid, model, kParams, k); }, repeats);
    v.expect(t_ra < t_bvi, name + ": ra not faster than bvi");
    std::string line = name + fmt(": bvi %.2e ra %.2e", t_bvi, t_ra);
    if (model.is_exponential()) {
      const double t_pr = min_time([&] { solve_poisson(model.rate(), kParams, k); }, repeats);
      v.expect(t_pr < t_ra, name + ": poisson not faster than ra");
      line += fmt(" poisson %.2e", t_pr);
    }
    v.note(line);
  }
  return v;
}

// Invariants of a converged value function; returns a description of failures.
void check_invariants(Verdict& v, const std::string& name, const BviResult& r,
                      const CostConstants& k, double eps) {
  const auto& grid = r.value.grid;
  const auto& V = r.value.values;
  const std::size_t n = V.size();
  const std::size_t i_theta = grid.index_of(r.policy.theta);
  // Z is the plateau level. V(theta) itself is a merge value and sits above
  // the plateau by up to |G'(theta)| * step.
  const double z = V.back();

  double mono = 0.0;
  for (std::size_t i = grid.floor_index(k.c_n) + 1; i + 1 < n; ++i) {
    mono = std::max(mono, V[i + 1] - V[i]);
  }
  v.expect(mono <= 2 * eps, name + fmt(": monotonicity violated by %.2e", mono));

  double plateau = 0.0;
  for (std::size_t i = i_theta + 1; i < n; ++i) plateau = std::max(plateau, std::abs(V[i] - z));
  v.expect(plateau <= 2 * eps, name + fmt(": plateau deviation %.2e", plateau));

  const double peak = *std::max_element(V.begin(), V.end());
  v.expect(std::abs(peak - (z + k.g0)) <= 5 * eps,
           name + fmt(": peak off by %.2e", peak - (z + k.g0)));

  std::mt19937_64 gen(2718);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 10000; ++t) {
    std::size_t a = pick(gen), b = pick(gen);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    worst = std::min(worst, V[b] - V[a]);
  }
  v.expect(worst >= -k.g0 - 2 * eps, name + fmt(": pair bound %.4f below -g0", worst));

  double residual = 0.0;
  for (std::size_t i = 0; i < n && grid.node(i) <= k.theta_n; ++i) {
    residual = std::max(residual, std::abs(r.greedy.q_value[i] - V[i]));
  }
  v.expect(residual <= eps, name + fmt(": Bellman residual %.2e", residual));
}

Verdict structure_and_invariants(Verdict& invariants) {
  Verdict v;
  const auto k = compute_constants(kParams);
  const auto grid = StateGrid::nominal();
  const double step = grid.step();
  BviOptions options;
  for (const auto& [name, model] : structure_models()) {
    const auto r = solve_bvi(grid, model, kParams, k, options);
    const int switches = count_switches(r.greedy);
    v.expect(switches == 1, name + ": " + std::to_string(switches) + " switches");
    const std::size_t i_theta = grid.index_of(r.policy.theta);
    bool single = true;
    for (std::size_t i = i_theta + 1; i < grid.size(); ++i) {
      single = single && !r.greedy.merged[i] && r.greedy.action[i] == r.policy.c;
    }
    v.expect(single, name + ": cruise action not constant above theta");
    v.expect(r.policy.theta >= k.c_n - step && r.policy.theta <= k.theta_n + step,
             name + fmt(": theta %.2f out of bounds", r.policy.theta));
    v.expect(r.policy.c >= k.theta_n_prime - step && r.policy.c <= k.c_n + step,
             name + fmt(": c %.2f out of bounds", r.policy.c));
    v.note(name + fmt(": (%.2f, %.2f) %g sweeps", r.policy.theta, r.policy.c, r.iterations));
    check_invariants(invariants, name, r, k, options.epsilon);
  }
  if (invariants.ok) invariants.note("all five solves");
  return v;
}

Verdict closed_form() {
  Verdict v;
  const auto k = compute_constants(kParams);
  const auto s = solve_poisson(0.02, kParams, k);
  const double lambda = s.lambda, mu = lambda * (1 - kParams.gamma), h = 1e-4;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = s.c + 0.1 + (s.theta - s.c - 0.2) * (i + 0.5) / 100.0;
    const double fd = (closed_form_value(x + h, s, kParams, k) -
                       closed_form_value(x - h, s, kParams, k)) / (2 * h);
    const double rhs = reward_merge_derivative(x, kParams) - lambda * reward_merge(x, kParams) +
                       mu * closed_form_value(x, s, kParams, k);
    worst = std::max(worst, std::abs(fd - rhs));
  }
  v.expect(worst <= 1e-3 * (1 + std::abs(s.z)), fmt("ODE residual %.2e", worst));
  const double vc = closed_form_value(s.c, s, kParams, k);
  const double vt = closed_form_value(s.theta, s, kParams, k);
  v.expect(std::abs(vc - (s.z + k.g0)) <= 1e-6 * std::abs(s.z + k.g0), "V(c) != Z + g0");
  v.expect(std::abs(vt - s.z) <= 1e-6 * std::abs(s.z), "V(theta) != Z");
  v.expect(s.z == reward_merge(s.theta, kParams) / (1 - kParams.gamma), "Z != G(theta)/(1-gamma)");
  v.note(fmt("ODE residual %.2e, V(c)-Z-g0 %.2e, V(theta)-Z %.2e", worst, vc - s.z - k.g0,
             vt - s.z));
  return v;
}

Verdict degenerate_gamma() {
  Verdict v;
  CostParams p;
  p.gamma = 1e-6;
  const auto k = compute_constants(p);
  const auto grid = StateGrid::nominal();
  const double step = grid.step();
  for (const auto& [name, model] : structure_models()) {
    const auto bvi = solve_bvi(grid, model, p, k).policy;
    const auto ra = solve_ra(grid, model, p, k).policy;
    for (const auto& [solver, pol] : {std::pair{"bvi", bvi}, std::pair{"ra", ra}}) {
      v.expect(std::abs(pol.theta - k.theta_n) <= step && std::abs(pol.c - k.c_n) <= step,
               name + " " + solver + fmt(": (%.2f, %.2f)", pol.theta, pol.c));
    }
    if (model.is_exponential()) {
      const auto s = solve_poisson(model.rate(), p, k);
      v.expect(std::abs(s.theta - k.theta_n) <= step && std::abs(s.c - k.c_n) <= step,
               name + fmt(" poisson: (%.3f, %.3f)", s.theta, s.c));
    }
  }
  v.note(fmt("theta_n %.3f, c_n %.3f", k.theta_n, k.c_n));
  return v;
}

Verdict simulation_ordering() {
  Verdict v;
  const auto t = Clock::now();
  const auto k = compute_constants(kParams);
  const auto sched = FlowSchedule::bundled().with_average(173);
  const auto calibration = generate_arrivals(sched, 999, 86400);
  const double tau = calibrate_policy_a(calibration, kParams, k).tau;
  double base = 0, a = 0, rts = 0;
  std::size_t n_base = 0, n_a = 0, n_rts = 0;
  const int seeds = 10;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto rb = simulate(sched, PolicySpec::baseline(), kParams, k, seed);
    const auto ra = simulate(sched, PolicySpec::policy_a(tau), kParams, k, seed);
    const auto rr = simulate(sched, PolicySpec::rts(), kParams, k, seed);
    base += *rb.average_cost;
    a += *ra.average_cost;
    rts += *rr.average_cost;
    n_base += rb.count();
    n_a += ra.count();
    n_rts += rr.count();
  }
  base /= seeds;
  a /= seeds;
  rts /= seeds;
  const double elapsed = since(t);
  v.expect(std::min({n_base, n_a, n_rts}) >= 20000, "fewer than 2e4 vehicles per policy");
  v.expect(rts <= a, "RTS above Policy A");
  v.expect(a <= base, "Policy A above Baseline");
  const double saving = base - rts;
  v.expect(saving >= 0.45 && saving <= 1.35, fmt("saving %.3f outside [0.45, 1.35]", saving));
  v.expect(elapsed < 900.0, fmt("took %.0f s", elapsed));
  v.note(fmt("AC baseline %.4f, policy A %.4f, RTS %.4f", base, a, rts) +
         fmt("; saving %.3f per vehicle, tau_A %.1f s", saving, tau) +
         fmt(", %.0f vehicles, %.1f s", static_cast<double>(n_rts), elapsed));
  return v;
}

// Mean over seeds 1..5 of the RTS metric at 45 veh/hour.
double sweep_point(const CostParams& p, bool per_km) {
  const auto k = compute_constants(p);
  const auto sched = FlowSchedule::bundled().with_average(45);
  double sum = 0.0;
  for (int seed = 1; seed <= 5; ++seed) {
    const auto r = simulate(sched, PolicySpec::rts(), p, k, seed);
    sum += per_km ? *r.average_cost_per_km() : *r.average_cost;
  }
  return sum / 5.0;
}

Verdict sensitivity() {
  Verdict v;
  std::string gammas = "AC by gamma:", d2s = "AC' by d2:";
  double prev = std::numeric_limits<double>::infinity();
  for (double g : {0.5, 0.6, 0.7, 0.8, 0.9}) {
    CostParams p;
    p.gamma = g;
    const double ac = sweep_point(p, false);
    v.expect(ac <= prev, fmt("AC rises at gamma %.1f", g));
    prev = ac;
    gammas += fmt(" %.4f", ac);
  }
  prev = std::numeric_limits<double>::infinity();
  for (double d2 : {20.0, 30.0, 40.0, 50.0, 60.0, 70.0}) {
    CostParams p;
    p.gamma = 0.6;
    p.d2 = d2 * 1000.0;
    const double acp = sweep_point(p, true);
    v.expect(acp <= prev, fmt("AC' rises at d2 %.0f km", d2));
    prev = acp;
    d2s += fmt(" %.5f", acp);
  }
  v.note(gammas);
  v.note(d2s);
  return v;
}

Verdict estimator() {
  Verdict v;
  const double beta = 0.9, h = 50.0;
  const int m = 50;
  RateEstimator est(beta, m);
  for (int i = 0; i < m; ++i) est.observe(h);
  const double analytic = 1.0 / (h * (1.0 - std::pow(beta, m)));
  v.expect(std::abs(est.estimate() - analytic) <= 1e-15 * analytic, "constant headway estimate");

  const double lambda = 0.02;
  const auto model = ArrivalModel::exponential(lambda);
  int within = 0;
  std::string errors;
  for (int trial = 1; trial <= 10; ++trial) {
    const auto arrivals = generate_renewal_arrivals(model, 100 + trial, 3 * m);
    RateEstimator e(beta, m);
    for (const auto& a : arrivals) e.observe(a.gap);
    const double rel = e.estimate() / lambda - 1.0;
    within += std::abs(rel) <= 0.10;
    errors += fmt(" %+.2f", rel);
  }
  v.expect(within >= 9, std::to_string(within) + "/10 trials within 10% after 3M arrivals");
  v.note("relative errors:" + errors);
  return v;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  run(1, "constants", constants);
  run(2, "cross-solver agreement", cross_solver);
  run(3, "timing ordering", timing);
  Verdict invariants;
  run(4, "threshold structure", [&] { return structure_and_invariants(invariants); });
  report(5, "value-function invariants", invariants);
  run(6, "closed-form value function", closed_form);
  run(7, "degenerate discount", degenerate_gamma);
  run(8, "simulation ordering", simulation_ordering);
  run(9, "sensitivity trends", sensitivity);
  run(10, "rate estimator", estimator);
  std::printf("%d criteria failed, %.1f s\n", failures, since(start));
  return failures == 0 ? 0 : 1;
}

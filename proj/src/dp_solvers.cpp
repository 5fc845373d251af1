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

#include "platoon/dp_solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

constexpr double kNodeTolerance = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Product-integration weights of lambda*exp(-lambda x) over one cell of
// length len starting at offset x0, against a linear function: returns the
// weight on the right endpoint; total cell mass minus it goes to the left.
struct CellWeights {
  double left;
  double right;
};

CellWeights exponential_cell(double rate, double x0, double len) {
  const double scale = std::exp(-rate * x0);
  const double u = rate * len;
  const double mass = -std::expm1(-u);
  double right;
  if (u < 1e-4) {
    right = u * (0.5 - u * (1.0 / 3.0 - u / 8.0));
  } else {
    right = (mass - u * std::exp(-u)) / u;
  }
  return {scale * (mass - right), scale * right};
}

}  // namespace

// ---------------------------------------------------------------------------
// StateGrid

StateGrid::StateGrid(double m, double n, double step) : m_(m), n_(n), step_(step) {
  if (!std::isfinite(m) || !std::isfinite(n) || !(m < n)) {
    throw ConfigError("state grid needs finite bounds with m < n");
  }
  if (!(step > 0.0)) throw ConfigError("state grid step must be positive");
  const double cells = (n - m) / step;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > kNodeTolerance * std::max(1.0, rounded)) {
    throw ConfigError("state grid span (n - m) must be a whole number of steps");
  }
  count_ = static_cast<std::size_t>(rounded) + 1;
}

std::size_t StateGrid::index_of(double s) const {
  const double pos = (s - m_) / step_;
  const double rounded = std::round(pos);
  if (rounded < 0.0 || rounded > static_cast<double>(count_ - 1) ||
      std::abs(pos - rounded) > 1e-6) {
    throw DomainError("state " + std::to_string(s) + " is not a grid node");
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t StateGrid::floor_index(double s) const {
  const double pos = (s - m_) / step_;
  if (pos <= 0.0) return 0;
  const double fl = std::floor(pos + 1e-9);
  return std::min(static_cast<std::size_t>(fl), count_ - 1);
}

bool StateGrid::contains(double s) const {
  return s >= m_ - kNodeTolerance && s <= n_ + kNodeTolerance;
}

void StateGrid::require_brackets(const CostConstants& consts) const {
  if (!(m_ < consts.c_n && consts.c_n < consts.theta_n && consts.theta_n < n_)) {
    throw ConfigError("state grid must satisfy m < c_n < theta_n < n");
  }
}

nlohmann::json StateGrid::to_json() const {
  return {{"m", m_}, {"n", n_}, {"step", step_}};
}

// ---------------------------------------------------------------------------
// ValueFunction

double ValueFunction::at(double s) const {
  if (s >= grid.n()) return values.back();
  if (s <= grid.m()) return values.front();
  const double pos = (s - grid.m()) / grid.step();
  const auto i = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * values[i] + t * values[i + 1];
}

double expected_value(const ValueFunction& vf, double a, const ArrivalModel& model) {
  const auto& grid = vf.grid;
  if (!grid.contains(a)) {
    throw DomainError("expected_value: action " + std::to_string(a) + " outside the grid");
  }
  a = std::clamp(a, grid.m(), grid.n());

  if (const auto* e = std::get_if<Exponential>(&model.variant())) {
    double sum = 0.0;
    double lo = a;
    double v_lo = vf.at(a);
    std::size_t j = grid.floor_index(a) + 1;
    while (j < grid.size()) {
      const double hi = grid.node(j);
      if (hi > lo + 1e-12) {
        const double v_hi = vf.values[j];
        const auto w = exponential_cell(e->rate, lo - a, hi - lo);
        sum += w.left * v_lo + w.right * v_hi;
        v_lo = v_hi;
        lo = hi;
      }
      ++j;
    }
    return sum + model.tail_mass(grid.n() - a) * vf.values.back();
  }

  const auto point_masses = [&](const std::vector<DiscreteAtom>& atoms) {
    double sum = 0.0;
    for (const auto& atom : atoms) sum += atom.probability * vf.at(a + atom.headway);
    return sum;
  };
  if (const auto* d = std::get_if<DiscreteRandom>(&model.variant())) {
    return point_masses(d->atoms);
  }
  const auto& c = std::get<Constant>(model.variant());
  return point_masses({{c.headway, 1.0}});
}

// ---------------------------------------------------------------------------
// TransitionKernel

TransitionKernel::TransitionKernel(const StateGrid& grid, const ArrivalModel& model) {
  const std::size_t n = grid.size();
  const double h = grid.step();
  if (const auto* e = std::get_if<Exponential>(&model.variant())) {
    const auto cell = exponential_cell(e->rate, 0.0, h);
    const double decay = std::exp(-e->rate * h);
    weights_.assign(n, 0.0);
    double scale = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      weights_[k] += cell.left * scale;
      if (k + 1 < n) weights_[k + 1] += cell.right * scale;
      scale *= decay;
    }
  } else {
    std::vector<DiscreteAtom> atoms;
    if (const auto* d = std::get_if<DiscreteRandom>(&model.variant())) {
      atoms = d->atoms;
    } else {
      atoms.push_back({std::get<Constant>(model.variant()).headway, 1.0});
    }
    for (const auto& atom : atoms) {
      const double pos = atom.headway / h;
      double whole = std::floor(pos);
      double frac = pos - whole;
      if (frac > 1.0 - 1e-9) {
        whole += 1.0;
        frac = 0.0;
      } else if (frac < 1e-9) {
        frac = 0.0;
      }
      const auto k = static_cast<std::size_t>(whole);
      if (weights_.size() < k + 2) weights_.resize(k + 2, 0.0);
      weights_[k] += atom.probability * (1.0 - frac);
      weights_[k + 1] += atom.probability * frac;
    }
  }
  prefix_.assign(weights_.size() + 1, 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) prefix_[k + 1] = prefix_[k] + weights_[k];
}

double TransitionKernel::expectation(std::span<const double> values, std::size_t i) const {
  const std::size_t last = values.size() - 1;
  const std::size_t span = std::min(last - i, weights_.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < span; ++k) sum += weights_[k] * values[i + k];
  return sum + (1.0 - prefix_[span]) * values[last];
}

double TransitionKernel::expectation_above(std::span<const double> values,
                                           std::size_t i) const {
  const std::size_t last = values.size() - 1;
  const std::size_t span = std::min(last - i, weights_.size());
  if (span == 0) return values[last];
  double sum = 0.0;
  for (std::size_t k = 1; k < span; ++k) sum += weights_[k] * values[i + k];
  return sum + (1.0 - prefix_[span]) * values[last];
}

// ---------------------------------------------------------------------------
// Backups and greedy policies

namespace {

// Number of nodes strictly below t0 - step (admissible cruise actions).
std::size_t cruise_cutoff(const StateGrid& grid, double t0) {
  std::size_t count = 0;
  while (count < grid.size() && grid.node(count) < t0 - grid.step() - 1e-12) ++count;
  return count;
}

bool merge_admissible(double s, double t0) { return s <= t0 - kSingularityGuard; }

struct QTables {
  std::vector<double> merge;   // G(s_j) + gamma E_j, -inf where merging is inadmissible
  std::vector<double> cruise;  // H(s_j) + gamma E_j, -inf outside the action set
};

// Action values for nodes [0, limit).
QTables q_tables(std::span<const double> values, const TransitionKernel& kernel,
                 const StateGrid& grid, std::size_t limit, const CostParams& p,
                 const CostConstants& consts) {
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  QTables q;
  q.merge.assign(limit, kNone);
  q.cruise.assign(limit, kNone);
  const std::size_t cutoff = cruise_cutoff(grid, consts.t0);
  for (std::size_t j = 0; j < limit; ++j) {
    const double s = grid.node(j);
    if (!merge_admissible(s, consts.t0)) continue;
    q.merge[j] = reward_merge(s, p) + p.gamma * kernel.expectation(values, j);
    if (j < cutoff) q.cruise[j] = q.merge[j] - consts.g0;
  }
  return q;
}

// Maximizes over the merge action and every cruise action strictly below
// node i. The first maximizer wins among equal cruise values.
Backup backup_from(const QTables& q, const StateGrid& grid, std::size_t i, double t0) {
  double cruise = -std::numeric_limits<double>::infinity();
  std::size_t cruise_at = 0;
  const std::size_t upto = std::min(i, q.cruise.size());
  for (std::size_t j = 0; j < upto; ++j) {
    if (q.cruise[j] > cruise) {
      cruise = q.cruise[j];
      cruise_at = j;
    }
  }
  const double s = grid.node(i);
  if (merge_admissible(s, t0) && i < q.merge.size() && q.merge[i] >= cruise) {
    return {q.merge[i], s, true};
  }
  if (!std::isfinite(cruise)) {
    throw NumericalError("bellman_backup: node " + std::to_string(s) + " has no admissible action");
  }
  return {cruise, grid.node(cruise_at), false};
}

}  // namespace

Backup bellman_backup(const ValueFunction& vf, double s, const ArrivalModel& model,
                      const CostParams& p, const CostConstants& consts) {
  const auto& grid = vf.grid;
  const std::size_t i = grid.index_of(s);
  const TransitionKernel kernel(grid, model);
  const auto q = q_tables(vf.values, kernel, grid, i + 1, p, consts);
  return backup_from(q, grid, i, consts.t0);
}

GreedyPolicy greedy_policy(const ValueFunction& vf, const ArrivalModel& model,
                           const CostParams& p, const CostConstants& consts) {
  const auto& grid = vf.grid;
  const TransitionKernel kernel(grid, model);
  const auto q = q_tables(vf.values, kernel, grid, grid.size(), p, consts);
  GreedyPolicy greedy;
  greedy.action.resize(grid.size());
  greedy.merged.resize(grid.size());
  greedy.q_value.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto b = backup_from(q, grid, i, consts.t0);
    greedy.action[i] = b.best_action;
    greedy.merged[i] = b.merged;
    greedy.q_value[i] = b.value;
  }
  return greedy;
}

int count_switches(const GreedyPolicy& greedy) {
  int switches = 0;
  for (std::size_t i = 1; i < greedy.merged.size(); ++i) {
    if (greedy.merged[i] != greedy.merged[i - 1]) ++switches;
  }
  return switches;
}

ThresholdPolicy extract_threshold(const StateGrid& grid, const GreedyPolicy& greedy) {
  std::size_t last_merge = grid.size();
  for (std::size_t i = grid.size(); i-- > 0;) {
    if (greedy.merged[i]) {
      last_merge = i;
      break;
    }
  }
  if (last_merge == grid.size()) {
    throw NumericalError("extract_threshold: greedy policy never merges");
  }
  const std::size_t above = std::min(last_merge + 1, grid.size() - 1);
  if (greedy.merged[above]) {
    throw NumericalError("extract_threshold: greedy policy merges at the top of the grid");
  }
  return {grid.node(last_merge), greedy.action[above]};
}

// ---------------------------------------------------------------------------
// Bounded value iteration

BviResult solve_bvi(const StateGrid& grid, const ArrivalModel& model, const CostParams& p,
                    const CostConstants& consts, const BviOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("BVI epsilon must be positive");
  grid.require_brackets(consts);
  const auto start = Clock::now();

  const TransitionKernel kernel(grid, model);
  const std::size_t top = grid.floor_index(consts.theta_n);
  std::vector<double> values(grid.size(), 0.0);
  std::vector<double> next(grid.size(), 0.0);

  int sweeps = 0;
  double delta = std::numeric_limits<double>::infinity();
  while (delta >= options.epsilon) {
    if (sweeps >= options.max_sweeps) {
      throw NumericalError("BVI did not converge within " + std::to_string(options.max_sweeps) +
                           " sweeps (last delta " + std::to_string(delta) + ")");
    }
    const auto q = q_tables(values, kernel, grid, top + 1, p, consts);
    for (std::size_t i = 0; i <= top; ++i) next[i] = backup_from(q, grid, i, consts.t0).value;
    for (std::size_t i = top + 1; i < grid.size(); ++i) next[i] = next[top];
    delta = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!std::isfinite(next[i])) throw NumericalError("BVI produced a non-finite value");
      delta = std::max(delta, std::abs(next[i] - values[i]));
    }
    values.swap(next);
    ++sweeps;
  }

  BviResult result{ValueFunction{grid, std::move(values)}, {}, {}, sweeps, 0.0};
  result.greedy = greedy_policy(result.value, model, p, consts);
  result.policy = extract_threshold(grid, result.greedy);
  result.wall_time_s = seconds_since(start);
  return result;
}

// ---------------------------------------------------------------------------
// Recursive approximation

RaResult solve_ra(const StateGrid& grid, const ArrivalModel& model, const CostParams& p,
                  const CostConstants& consts, const RaOptions& options) {
  grid.require_brackets(consts);
  const auto start = Clock::now();

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid.node(i);
    if (s >= consts.c_n && s <= consts.theta_n) candidates.push_back(i);
  }
  if (candidates.empty()) {
    throw ConfigError("recursive approximation: no grid node in [c_n, theta_n]");
  }

  const TransitionKernel kernel(grid, model);
  const double w0 = kernel.self_weight();
  const double g = p.gamma;
  std::vector<double> merge_reward(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double s = grid.node(j);
    merge_reward[j] = merge_admissible(s, consts.t0) ? reward_merge(s, p) : 0.0;
  }

  RaResult best{{}, 0.0, std::numeric_limits<double>::infinity(), ValueFunction{grid, {}}, 0, 0.0};
  std::vector<double> values(grid.size());
  for (const std::size_t ci : candidates) {
    const double z = merge_reward[ci] / (1.0 - g);
    std::fill(values.begin() + static_cast<std::ptrdiff_t>(ci), values.end(), z);
    for (std::size_t j = ci; j-- > 0;) {
      const double rest = kernel.expectation_above(values, j);
      if (options.zero_offset == ZeroOffset::kImplicit) {
        values[j] = (merge_reward[j] + g * rest) / (1.0 - g * w0);
      } else {
        const double guess = 2.0 * values[j + 1] - values[j + 2];
        values[j] = merge_reward[j] + g * (rest + w0 * guess);
      }
    }
    const auto peak = std::max_element(values.begin(), values.end());
    const double residual = std::abs(*peak - (z + consts.g0));
    // Ties go to the larger threshold; candidates are visited in ascending order.
    if (residual <= best.selection_residual) {
      best.selection_residual = residual;
      best.z = z;
      best.policy = {grid.node(ci), grid.node(static_cast<std::size_t>(peak - values.begin()))};
      best.value = ValueFunction{grid, values};
    }
  }
  best.candidates = static_cast<int>(candidates.size());
  best.wall_time_s = seconds_since(start);
  return best;
}

}  // namespace platoon

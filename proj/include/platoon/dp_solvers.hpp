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

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "platoon/arrivals.hpp"
#include "platoon/cost_model.hpp"

namespace platoon {

/// Uniform discretization of the predicted-headway axis on [m, n].
class StateGrid {
 public:
  /// Throws ConfigError unless m < n, step > 0 and (n - m) / step is integral.
  StateGrid(double m, double n, double step);

  /// The default grid: [-100, 400] with 0.25 s spacing.
  static StateGrid nominal() { return StateGrid(-100.0, 400.0, 0.25); }

  double m() const { return m_; }
  double n() const { return n_; }
  double step() const { return step_; }
  std::size_t size() const { return count_; }
  double node(std::size_t i) const { return m_ + static_cast<double>(i) * step_; }

  /// Index of the node at s, or throws DomainError when s is not a node.
  std::size_t index_of(double s) const;
  /// Index of the largest node <= s (clamped to the grid).
  std::size_t floor_index(double s) const;
  bool contains(double s) const;

  /// Throws ConfigError unless m < c_n < theta_n < n.
  void require_brackets(const CostConstants& consts) const;

  nlohmann::json to_json() const;

 private:
  double m_;
  double n_;
  double step_;
  std::size_t count_;
};

/// Value estimate on the grid; V(s) = V(n) beyond the upper bound and linear
/// interpolation between nodes.
struct ValueFunction {
  StateGrid grid;
  std::vector<double> values;

  double at(double s) const;
};

/// Merge when s <= theta, otherwise cruise with time reduction c.
struct ThresholdPolicy {
  double theta = 0.0;
  double c = 0.0;
};

/// E[V(a + X)] for an arbitrary a in [m, n], integrating the density against
/// the piecewise-linear interpolant of V and closing with tail_mass * V(n).
double expected_value(const ValueFunction& vf, double a, const ArrivalModel& model);

/**
 * Node weights of E[V(s_i + X)] for the on-grid fast path. For node i with
 * K = N-1-i nodes above it the expectation is
 *   sum_{k<K} w_k V[i+k] + (1 - sum_{k<K} w_k) V[N-1],
 * so the beyond-grid mass and the last partial cell both land on V(n).
 */
class TransitionKernel {
 public:
  TransitionKernel(const StateGrid& grid, const ArrivalModel& model);

  double expectation(std::span<const double> values, std::size_t i) const;
  /// Same, skipping the zero-offset weight (the term on V[i] itself).
  double expectation_above(std::span<const double> values, std::size_t i) const;
  double self_weight() const { return weights_.empty() ? 0.0 : weights_[0]; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  std::vector<double> prefix_;  // prefix_[j] = sum_{k<j} w_k
};

struct Backup {
  double value = 0.0;
  double best_action = 0.0;
  bool merged = false;
};

/// One Bellman backup at grid node s: the merge candidate a = s (if s < t0)
/// against every grid action strictly below min(s, t0 - step). Ties go to merge.
Backup bellman_backup(const ValueFunction& vf, double s, const ArrivalModel& model,
                      const CostParams& p, const CostConstants& consts);

/// Greedy action for every node under a fixed value function.
struct GreedyPolicy {
  std::vector<double> action;
  std::vector<bool> merged;
  std::vector<double> q_value;
};

GreedyPolicy greedy_policy(const ValueFunction& vf, const ArrivalModel& model,
                           const CostParams& p, const CostConstants& consts);

/// Number of merge -> cruise switches walking the grid upward (a threshold
/// policy has exactly one).
int count_switches(const GreedyPolicy& greedy);

/// theta = largest merge node, c = cruise action at the node above it.
ThresholdPolicy extract_threshold(const StateGrid& grid, const GreedyPolicy& greedy);

struct BviOptions {
  double epsilon = 0.002;
  int max_sweeps = 100000;
};

struct BviResult {
  ValueFunction value;
  ThresholdPolicy policy;
  GreedyPolicy greedy;
  int iterations = 0;
  double wall_time_s = 0.0;
};

/// Bounded value iteration: synchronous sweeps over nodes <= theta_n, holding
/// the nodes above at V(theta_n). Throws NumericalError past max_sweeps.
BviResult solve_bvi(const StateGrid& grid, const ArrivalModel& model, const CostParams& p,
                    const CostConstants& consts, const BviOptions& options = {});

/// How the recursion handles the zero-offset quadrature node, whose value is
/// the unknown being computed.
enum class ZeroOffset {
  kImplicit,     ///< solve the scalar linear equation for V(s) exactly
  kExtrapolate,  ///< replace V(s) by 2 V(s + step) - V(s + 2 step)
};

struct RaOptions {
  ZeroOffset zero_offset = ZeroOffset::kImplicit;
};

struct RaResult {
  ThresholdPolicy policy;
  double z = 0.0;
  double selection_residual = 0.0;  ///< |M_i - (Z_i + g0)| of the winner
  ValueFunction value;
  int candidates = 0;
  double wall_time_s = 0.0;
};

/// Recursive approximation over candidate thresholds in [c_n, theta_n].
RaResult solve_ra(const StateGrid& grid, const ArrivalModel& model, const CostParams& p,
                  const CostConstants& consts, const RaOptions& options = {});

}  // namespace platoon

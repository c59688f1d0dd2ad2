/*
 * Copyright 2026 The Recourse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RECOURSE_PLANNER_H_
#define RECOURSE_PLANNER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recourse/model.h"
#include "recourse/schema.h"

namespace recourse {

struct Effect {
  std::size_t feature = 0;
  double delta = 0.0;
};

// A directive the planner may recommend. Each stochastic outcome applies its
// list of effects; outcome_probs are parallel to outcomes.
struct Action {
  std::string name;
  // The general class of actions this one belongs to, e.g. "reduce your
  // total debt" for "pay off your car loan".
  std::string class_tag;
  std::vector<std::vector<Effect>> outcomes;
  std::vector<double> outcome_probs;
  double cost = 0.0;
  std::vector<Clause> preconditions;
};

class ActionCatalog {
 public:
  ActionCatalog() = default;
  // Throws kInvalidInput when probabilities do not sum to 1, costs are
  // negative, names repeat, or an effect touches an immutable feature.
  ActionCatalog(const FeatureSchema& schema, std::vector<Action> actions);

  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  const Action& operator[](std::size_t i) const { return actions_[i]; }
  const std::vector<Action>& actions() const { return actions_; }

  std::optional<std::size_t> find(std::string_view name) const;
  double max_cost() const;
  // Every feature some outcome of `action` changes.
  std::vector<std::size_t> touched_features(std::size_t action) const;

 private:
  std::vector<Action> actions_;
};

// Bins of one feature: `edges` has one more entry than `representatives`.
struct FeatureBins {
  std::vector<double> edges;
  std::vector<double> representatives;

  std::size_t bin_of(double value) const;
  // Bins with representative = midpoint of each edge pair.
  static FeatureBins from_edges(std::vector<double> edges);
};

struct Binning {
  std::vector<FeatureBins> features;

  // Bins centred on the schema grid (levels for ordinal features, lo + k *
  // step for continuous ones), so grid values are their own
  // representatives.
  static Binning from_schema(const FeatureSchema& schema);
};

struct Transition {
  std::size_t next = 0;
  double probability = 0.0;
};

// Goal-directed MDP. Rewards are R(s, a, s') = -cost(a) + goal_bonus *
// [s' is a goal]; goal states are absorbing and have no enabled actions.
class RecourseMdp {
 public:
  // transitions[s][a] is empty when a is disabled in s.
  RecourseMdp(std::vector<double> action_costs,
              std::vector<std::vector<std::vector<Transition>>> transitions,
              std::vector<bool> goal, std::size_t initial, double discount,
              double goal_bonus);

  std::size_t num_states() const { return goal_.size(); }
  std::size_t num_actions() const { return action_costs_.size(); }
  std::size_t initial() const { return initial_; }
  double discount() const { return discount_; }
  double goal_bonus() const { return goal_bonus_; }
  double action_cost(std::size_t a) const { return action_costs_[a]; }

  std::span<const Transition> transitions(std::size_t s, std::size_t a) const {
    return transitions_[s][a];
  }
  bool enabled(std::size_t s, std::size_t a) const {
    return !transitions_[s][a].empty();
  }
  bool has_enabled_action(std::size_t s) const;
  bool is_goal(std::size_t s) const { return goal_[s]; }
  bool is_dead_end(std::size_t s) const {
    return !goal_[s] && !has_enabled_action(s);
  }
  bool is_terminal(std::size_t s) const {
    return goal_[s] || !has_enabled_action(s);
  }
  double reward(std::size_t a, std::size_t next) const {
    return -action_costs_[a] + (goal_[next] ? goal_bonus_ : 0.0);
  }

  // Descriptive metadata; set by build_recourse_mdp.
  std::vector<FeatureVector> representatives;
  std::vector<std::string> action_names;
  std::vector<std::string> class_tags;
  // Features whose bins vary across states.
  std::vector<std::size_t> varying_features;
  std::vector<std::string> varying_names;
  std::string model_fingerprint;

  // "income=45000,dti=32" for built MDPs, "s<index>" otherwise.
  std::string state_key(std::size_t s) const;
  std::string action_name(std::size_t a) const;

 private:
  std::vector<double> action_costs_;
  std::vector<std::vector<std::vector<Transition>>> transitions_;
  std::vector<bool> goal_;
  std::size_t initial_;
  double discount_;
  double goal_bonus_;
};

struct MdpBuildOptions {
  double discount = 0.95;
  // Defaults to 10 * the catalog's maximum action cost.
  std::optional<double> goal_bonus;
  std::size_t state_cap = 100000;
  // Per-feature binning overrides; empty means Binning::from_schema.
  std::optional<Binning> binning;
  // When nonempty, only actions whose effects stay within these features
  // take part.
  std::vector<std::size_t> focus;
};

// Reachable closure from the bin of `x` under enabled actions. Features no
// participating action touches keep x's exact value. Throws kInvalidInput
// for a discount outside (0, 1) or binning that does not cover the bounds,
// kCapExceeded when the closure outgrows the state cap and kInfeasible when
// no action is enabled at a non-goal initial state.
RecourseMdp build_recourse_mdp(const FeatureSchema& schema,
                               const ActionCatalog& catalog,
                               const LinearModel& model,
                               const FeatureVector& x, Label desired,
                               const MdpBuildOptions& options = {});

struct Policy {
  // nullopt is the terminal marker.
  std::vector<std::optional<std::size_t>> choice;
  std::vector<double> value;
  // Filled by q_learning: q_values[s][a], disabled actions stay at 0.
  std::vector<std::vector<double>> q_values;
  // Max-norm Bellman residual of each value-iteration sweep.
  std::vector<double> residuals;

  bool defined_at(std::size_t s) const {
    return s < choice.size() && choice[s].has_value();
  }
};

// Expected one-step return of taking `a` in `s` under `value`.
double q_value(const RecourseMdp& mdp, std::size_t s, std::size_t a,
               std::span<const double> value);

// Argmax over enabled actions; near-ties (relative 1e-9) go to the lowest
// index. nullopt for terminal states.
std::optional<std::size_t> greedy_action(const RecourseMdp& mdp,
                                         std::size_t s,
                                         std::span<const double> value);

// Synchronous Bellman optimality backups from V = 0 until the max-norm
// residual drops below epsilon. Terminal states keep value 0.
Policy value_iteration(const RecourseMdp& mdp, double epsilon = 1e-6);

struct QLearningConfig {
  std::size_t episodes = 10000;
  double step_size = 0.1;
  double epsilon_start = 1.0;
  double epsilon_decay = 0.999;
  double epsilon_floor = 0.05;
  std::size_t max_steps = 200;
  std::uint64_t seed = 42;
};

// Tabular epsilon-greedy Q-learning from the initial state. Bit-reproducible
// for a fixed seed.
Policy q_learning(const RecourseMdp& mdp, const QLearningConfig& config = {});

struct TrajectoryStep {
  std::size_t state;
  std::size_t action;
  std::size_t next;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double cost = 0.0;
  bool reached_goal = false;
};

// Rolls the policy out from the initial state; stops at a goal, a terminal
// or undefined state, or after max_steps.
Trajectory simulate_policy(const RecourseMdp& mdp, const Policy& policy,
                           std::uint64_t seed, std::size_t max_steps);

// Probability that following the policy from the initial state eventually
// enters a goal state.
double reachability(const RecourseMdp& mdp, const Policy& policy,
                    double tolerance = 1e-9);

struct PolicyCost {
  double expected = 0.0;
  bool bounded = true;
};

// Expected undiscounted action cost until absorption in a terminal state.
// Unbounded when the policy can cycle forever among non-terminal states.
// Throws kInvalidInput if the policy is undefined at a reachable
// non-terminal state.
PolicyCost policy_cost(const RecourseMdp& mdp, const Policy& policy,
                       double tolerance = 1e-9);

// Most likely path of the policy from the initial state: at each step the
// most probable successor is followed. Stops at terminals, undefined
// states, repeated states or after max_steps.
std::vector<TrajectoryStep> extract_plan(const RecourseMdp& mdp,
                                         const Policy& policy,
                                         std::size_t max_steps = 100);

// mt19937_64 with library-independent conversions, so seeded runs are
// identical across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace recourse

#endif  // RECOURSE_PLANNER_H_

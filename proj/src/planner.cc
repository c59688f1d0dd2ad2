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

#include "recourse/planner.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <string>

#include "recourse/error.h"

namespace recourse {
namespace {

constexpr double kProbabilityTolerance = 1e-9;
constexpr double kTieTolerance = 1e-9;

bool improves(double candidate, double best) {
  return candidate > best + kTieTolerance * std::max(1.0, std::abs(best));
}

FeatureBins bins_from_centers(std::vector<double> centers) {
  FeatureBins bins;
  const std::size_t n = centers.size();
  if (n == 1) {
    bins.edges = {centers[0] - 0.5, centers[0] + 0.5};
  } else {
    bins.edges.push_back(centers[0] - 0.5 * (centers[1] - centers[0]));
    for (std::size_t k = 0; k + 1 < n; ++k) {
      bins.edges.push_back(0.5 * (centers[k] + centers[k + 1]));
    }
    bins.edges.push_back(centers[n - 1] +
                         0.5 * (centers[n - 1] - centers[n - 2]));
  }
  bins.representatives = std::move(centers);
  return bins;
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

std::size_t sample(std::span<const Transition> row, RandomStream& random) {
  const double u = random.uniform();
  double cumulative = 0.0;
  for (const Transition& t : row) {
    cumulative += t.probability;
    if (u < cumulative) return t.next;
  }
  return row.back().next;
}

// States reachable from the initial state when following the policy.
std::vector<bool> policy_reachable(const RecourseMdp& mdp,
                                   const Policy& policy) {
  std::vector<bool> seen(mdp.num_states(), false);
  std::vector<std::size_t> stack{mdp.initial()};
  seen[mdp.initial()] = true;
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    if (mdp.is_terminal(s) || !policy.defined_at(s)) continue;
    for (const Transition& t : mdp.transitions(s, *policy.choice[s])) {
      if (t.probability > 0.0 && !seen[t.next]) {
        seen[t.next] = true;
        stack.push_back(t.next);
      }
    }
  }
  return seen;
}

// Reachable states from which some state in `target` can be reached under
// the policy (backward closure).
std::vector<bool> can_reach(const RecourseMdp& mdp, const Policy& policy,
                            const std::vector<bool>& reachable,
                            const std::vector<bool>& target) {
  const std::size_t n = mdp.num_states();
  std::vector<std::vector<std::size_t>> predecessors(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (!reachable[s] || mdp.is_terminal(s) || !policy.defined_at(s)) continue;
    for (const Transition& t : mdp.transitions(s, *policy.choice[s])) {
      if (t.probability > 0.0) predecessors[t.next].push_back(s);
    }
  }
  std::vector<bool> hit(n, false);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (reachable[s] && target[s]) {
      hit[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (std::size_t p : predecessors[s]) {
      if (!hit[p]) {
        hit[p] = true;
        stack.push_back(p);
      }
    }
  }
  return hit;
}

}  // namespace

ActionCatalog::ActionCatalog(const FeatureSchema& schema,
                             std::vector<Action> actions)
    : actions_(std::move(actions)) {
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    const Action& action = actions_[a];
    const std::string where = "action '" + action.name + "'";
    if (action.name.empty()) throw_invalid("action without a name");
    for (std::size_t b = 0; b < a; ++b) {
      if (actions_[b].name == action.name) {
        throw_invalid("duplicate " + where);
      }
    }
    if (!(action.cost >= 0.0) || !std::isfinite(action.cost)) {
      throw_invalid(where + ": cost must be a finite value >= 0");
    }
    if (action.outcomes.empty()) throw_invalid(where + ": no outcomes");
    if (action.outcomes.size() != action.outcome_probs.size()) {
      throw_invalid(where + ": outcome_probs must parallel effects");
    }
    double total = 0.0;
    for (double p : action.outcome_probs) {
      if (!(p >= 0.0)) throw_invalid(where + ": negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw_invalid(where + ": outcome probabilities sum to " +
                    format_number(total));
    }
    for (const auto& outcome : action.outcomes) {
      for (const Effect& effect : outcome) {
        if (effect.feature >= schema.size()) {
          throw_invalid(where + ": effect on unknown feature");
        }
        if (schema[effect.feature].mutability == Mutability::kImmutable) {
          throw_invalid(where + ": changes immutable feature '" +
                        schema[effect.feature].name + "'");
        }
        if (!std::isfinite(effect.delta)) {
          throw_invalid(where + ": non-finite effect");
        }
      }
    }
    for (const Clause& clause : action.preconditions) {
      if (clause.feature >= schema.size()) {
        throw_invalid(where + ": precondition on unknown feature");
      }
    }
  }
}

std::optional<std::size_t> ActionCatalog::find(std::string_view name) const {
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    if (actions_[a].name == name) return a;
  }
  return std::nullopt;
}

double ActionCatalog::max_cost() const {
  double best = 0.0;
  for (const Action& action : actions_) best = std::max(best, action.cost);
  return best;
}

std::vector<std::size_t> ActionCatalog::touched_features(
    std::size_t action) const {
  std::vector<std::size_t> features;
  for (const auto& outcome : actions_[action].outcomes) {
    for (const Effect& effect : outcome) {
      if (effect.delta != 0.0) features.push_back(effect.feature);
    }
  }
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()),
                 features.end());
  return features;
}

std::size_t FeatureBins::bin_of(double value) const {
  if (representatives.size() <= 1) return 0;
  auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, value);
  return static_cast<std::size_t>(it - (edges.begin() + 1));
}

FeatureBins FeatureBins::from_edges(std::vector<double> edges) {
  if (edges.size() < 2) throw_invalid("bins need at least two edges");
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (!(edges[k] < edges[k + 1])) {
      throw_invalid("bin edges must be strictly increasing");
    }
  }
  FeatureBins bins;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    bins.representatives.push_back(0.5 * (edges[k] + edges[k + 1]));
  }
  bins.edges = std::move(edges);
  return bins;
}

Binning Binning::from_schema(const FeatureSchema& schema) {
  Binning binning;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const FeatureSpec& spec = schema[i];
    std::vector<double> centers = schema.grid_values(i);
    if (spec.kind == FeatureKind::kContinuous &&
        spec.hi - centers.back() > 1e-9 * std::max(1.0, spec.hi - spec.lo)) {
      centers.push_back(spec.hi);
    }
    binning.features.push_back(bins_from_centers(std::move(centers)));
  }
  return binning;
}

RecourseMdp::RecourseMdp(
    std::vector<double> action_costs,
    std::vector<std::vector<std::vector<Transition>>> transitions,
    std::vector<bool> goal, std::size_t initial, double discount,
    double goal_bonus)
    : action_costs_(std::move(action_costs)),
      transitions_(std::move(transitions)),
      goal_(std::move(goal)),
      initial_(initial),
      discount_(discount),
      goal_bonus_(goal_bonus) {
  if (goal_.empty()) throw_invalid("MDP without states");
  if (transitions_.size() != goal_.size()) {
    throw_invalid("transition table does not match the state count");
  }
  if (initial_ >= goal_.size()) throw_invalid("initial state out of range");
  if (!(discount_ > 0.0 && discount_ < 1.0)) {
    throw_invalid("discount must lie in (0, 1)");
  }
  for (std::size_t s = 0; s < transitions_.size(); ++s) {
    if (transitions_[s].size() != action_costs_.size()) {
      throw_invalid("transition table does not match the action count");
    }
    for (std::size_t a = 0; a < action_costs_.size(); ++a) {
      auto& row = transitions_[s][a];
      if (goal_[s]) {
        row.clear();
        continue;
      }
      if (row.empty()) continue;
      double total = 0.0;
      for (const Transition& t : row) {
        if (t.next >= goal_.size() || !(t.probability >= 0.0)) {
          throw_invalid("malformed transition");
        }
        total += t.probability;
      }
      if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw_invalid("transition probabilities of state " +
                      std::to_string(s) + ", action " + std::to_string(a) +
                      " sum to " + format_number(total));
      }
    }
  }
}

bool RecourseMdp::has_enabled_action(std::size_t s) const {
  return std::any_of(transitions_[s].begin(), transitions_[s].end(),
                     [](const auto& row) { return !row.empty(); });
}

std::string RecourseMdp::state_key(std::size_t s) const {
  if (representatives.empty()) return "s" + std::to_string(s);
  std::string key;
  for (std::size_t k = 0; k < varying_features.size(); ++k) {
    if (!key.empty()) key += ",";
    key += varying_names[k] + "=" +
           format_number(representatives[s][varying_features[k]]);
  }
  return key.empty() ? "initial" : key;
}

std::string RecourseMdp::action_name(std::size_t a) const {
  return a < action_names.size() ? action_names[a] : "a" + std::to_string(a);
}

RecourseMdp build_recourse_mdp(const FeatureSchema& schema,
                               const ActionCatalog& catalog,
                               const LinearModel& model,
                               const FeatureVector& x, Label desired,
                               const MdpBuildOptions& options) {
  if (!(options.discount > 0.0 && options.discount < 1.0)) {
    throw_invalid("discount must lie in (0, 1)");
  }
  if (options.state_cap == 0) throw_invalid("state cap must be positive");
  schema.validate(x);
  if (model.schema().size() != schema.size()) {
    throw_invalid("model and schema disagree");
  }

  const std::size_t num_actions = catalog.size();
  std::vector<bool> participating(num_actions, true);
  std::vector<bool> touched(schema.size(), false);
  for (std::size_t a = 0; a < num_actions; ++a) {
    const auto features = catalog.touched_features(a);
    if (!options.focus.empty()) {
      participating[a] = std::all_of(
          features.begin(), features.end(), [&](std::size_t f) {
            return std::find(options.focus.begin(), options.focus.end(), f) !=
                   options.focus.end();
          });
    }
    if (participating[a]) {
      for (std::size_t f : features) touched[f] = true;
    }
  }

  Binning binning =
      options.binning ? *options.binning : Binning::from_schema(schema);
  if (binning.features.size() != schema.size()) {
    throw_invalid("binning does not match the schema");
  }
  std::vector<std::size_t> varying;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!touched[i]) continue;
    const FeatureBins& bins = binning.features[i];
    if (bins.edges.size() != bins.representatives.size() + 1 ||
        bins.representatives.empty()) {
      throw_invalid("malformed bins for '" + schema[i].name + "'");
    }
    if (bins.edges.front() > schema[i].lo || bins.edges.back() < schema[i].hi) {
      throw_invalid("bins for '" + schema[i].name +
                    "' do not cover the feature bounds");
    }
    varying.push_back(i);
  }

  using Key = std::vector<std::size_t>;
  auto representative_of = [&](const Key& key) {
    FeatureVector rep = x;
    for (std::size_t k = 0; k < varying.size(); ++k) {
      rep[varying[k]] =
          binning.features[varying[k]].representatives[key[k]];
    }
    return rep;
  };

  std::map<Key, std::size_t> index;
  std::vector<Key> keys;
  std::vector<FeatureVector> reps;
  std::vector<bool> goal;
  auto intern = [&](const Key& key) {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (keys.size() >= options.state_cap) {
      throw RecourseError(
          ErrorCode::kCapExceeded,
          "state cap " + std::to_string(options.state_cap) +
              " exceeded: more than " + std::to_string(keys.size()) +
              " reachable states");
    }
    const std::size_t id = keys.size();
    index.emplace(key, id);
    keys.push_back(key);
    reps.push_back(representative_of(key));
    goal.push_back(classify(model, reps.back()) == desired);
    return id;
  };

  Key initial_key;
  for (std::size_t f : varying) {
    initial_key.push_back(binning.features[f].bin_of(x[f]));
  }
  intern(initial_key);

  std::vector<std::vector<std::vector<Transition>>> transitions;
  for (std::size_t s = 0; s < keys.size(); ++s) {
    transitions.emplace_back(num_actions);
    if (goal[s]) continue;
    const FeatureVector rep = reps[s];
    for (std::size_t a = 0; a < num_actions; ++a) {
      if (!participating[a]) continue;
      const Action& action = catalog[a];
      if (!holds_all(action.preconditions, rep)) continue;
      std::vector<Transition> row;
      bool in_bounds = true;
      for (std::size_t o = 0; o < action.outcomes.size() && in_bounds; ++o) {
        if (action.outcome_probs[o] <= 0.0) continue;
        FeatureVector next = rep;
        for (const Effect& effect : action.outcomes[o]) {
          next[effect.feature] += effect.delta;
        }
        Key key(varying.size());
        for (std::size_t k = 0; k < varying.size(); ++k) {
          const FeatureSpec& spec = schema[varying[k]];
          const double value = next[varying[k]];
          const double slack = 1e-9 * std::max(1.0, spec.hi - spec.lo);
          if (value < spec.lo - slack || value > spec.hi + slack) {
            in_bounds = false;
            break;
          }
          key[k] = binning.features[varying[k]].bin_of(value);
        }
        if (!in_bounds) break;
        const std::size_t next_id = intern(key);
        auto merged = std::find_if(row.begin(), row.end(),
                                   [&](const Transition& t) {
                                     return t.next == next_id;
                                   });
        if (merged != row.end()) {
          merged->probability += action.outcome_probs[o];
        } else {
          row.push_back({next_id, action.outcome_probs[o]});
        }
      }
      if (in_bounds) transitions[s][a] = std::move(row);
    }
  }
  // intern() may have appended states after their rows were sized.
  transitions.resize(keys.size(),
                     std::vector<std::vector<Transition>>(num_actions));

  std::vector<double> costs;
  for (const Action& action : catalog.actions()) costs.push_back(action.cost);
  double bonus = options.goal_bonus.value_or(10.0 * catalog.max_cost());
  if (!options.goal_bonus && bonus <= 0.0) bonus = 10.0;

  RecourseMdp mdp(std::move(costs), std::move(transitions), std::move(goal),
                  0, options.discount, bonus);
  if (!mdp.is_goal(0) && !mdp.has_enabled_action(0)) {
    throw_infeasible("no action in the catalog is enabled at the initial "
                     "state");
  }
  mdp.representatives = std::move(reps);
  for (const Action& action : catalog.actions()) {
    mdp.action_names.push_back(action.name);
    mdp.class_tags.push_back(action.class_tag);
  }
  mdp.varying_features = varying;
  for (std::size_t f : varying) mdp.varying_names.push_back(schema[f].name);
  mdp.model_fingerprint = model_fingerprint(model);
  return mdp;
}

double q_value(const RecourseMdp& mdp, std::size_t s, std::size_t a,
               std::span<const double> value) {
  double q = 0.0;
  for (const Transition& t : mdp.transitions(s, a)) {
    q += t.probability *
         (mdp.reward(a, t.next) + mdp.discount() * value[t.next]);
  }
  return q;
}

std::optional<std::size_t> greedy_action(const RecourseMdp& mdp,
                                         std::size_t s,
                                         std::span<const double> value) {
  if (mdp.is_terminal(s)) return std::nullopt;
  std::optional<std::size_t> best;
  double best_q = 0.0;
  for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
    if (!mdp.enabled(s, a)) continue;
    const double q = q_value(mdp, s, a, value);
    if (!best || improves(q, best_q)) {
      best = a;
      best_q = q;
    }
  }
  return best;
}

Policy value_iteration(const RecourseMdp& mdp, double epsilon) {
  if (!(epsilon > 0.0)) throw_invalid("epsilon must be positive");
  const std::size_t n = mdp.num_states();
  std::vector<double> value(n, 0.0);
  std::vector<double> next(n, 0.0);
  Policy policy;
  while (true) {
    double residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (mdp.is_terminal(s)) {
        next[s] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        if (mdp.enabled(s, a)) best = std::max(best, q_value(mdp, s, a, value));
      }
      next[s] = best;
      residual = std::max(residual, std::abs(best - value[s]));
    }
    value.swap(next);
    policy.residuals.push_back(residual);
    if (residual < epsilon) break;
  }
  policy.choice.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    policy.choice[s] = greedy_action(mdp, s, value);
  }
  policy.value = std::move(value);
  return policy;
}

Policy q_learning(const RecourseMdp& mdp, const QLearningConfig& config) {
  if (config.episodes == 0) throw_invalid("q_learning needs episodes >= 1");
  if (!(config.step_size > 0.0 && config.step_size <= 1.0)) {
    throw_invalid("step size must lie in (0, 1]");
  }
  const std::size_t n = mdp.num_states();
  const std::size_t num_actions = mdp.num_actions();
  std::vector<std::vector<double>> q(n, std::vector<double>(num_actions, 0.0));
  std::vector<std::vector<std::size_t>> enabled(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (mdp.is_goal(s)) continue;
    for (std::size_t a = 0; a < num_actions; ++a) {
      if (mdp.enabled(s, a)) enabled[s].push_back(a);
    }
  }
  auto argmax = [&](std::size_t s) {
    std::size_t best = enabled[s].front();
    for (std::size_t a : enabled[s]) {
      if (improves(q[s][a], q[s][best])) best = a;
    }
    return best;
  };

  RandomStream random(config.seed);
  double epsilon = config.epsilon_start;
  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    std::size_t s = mdp.initial();
    for (std::size_t step = 0; step < config.max_steps; ++step) {
      if (enabled[s].empty()) break;
      const std::size_t a = random.uniform() < epsilon
                                ? enabled[s][random.below(enabled[s].size())]
                                : argmax(s);
      const std::size_t next = sample(mdp.transitions(s, a), random);
      const double future =
          enabled[next].empty() ? 0.0 : q[next][argmax(next)];
      const double target = mdp.reward(a, next) + mdp.discount() * future;
      q[s][a] += config.step_size * (target - q[s][a]);
      s = next;
    }
    epsilon = std::max(config.epsilon_floor, epsilon * config.epsilon_decay);
  }

  Policy policy;
  policy.choice.resize(n);
  policy.value.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (enabled[s].empty()) continue;
    const std::size_t best = argmax(s);
    policy.choice[s] = best;
    policy.value[s] = q[s][best];
  }
  policy.q_values = std::move(q);
  return policy;
}

Trajectory simulate_policy(const RecourseMdp& mdp, const Policy& policy,
                           std::uint64_t seed, std::size_t max_steps) {
  RandomStream random(seed);
  Trajectory trajectory;
  std::size_t s = mdp.initial();
  for (std::size_t step = 0; step < max_steps; ++step) {
    if (mdp.is_goal(s) || mdp.is_terminal(s) || !policy.defined_at(s)) break;
    const std::size_t a = *policy.choice[s];
    if (!mdp.enabled(s, a)) break;
    const std::size_t next = sample(mdp.transitions(s, a), random);
    trajectory.steps.push_back({s, a, next});
    trajectory.cost += mdp.action_cost(a);
    s = next;
  }
  trajectory.reached_goal = mdp.is_goal(s);
  return trajectory;
}

double reachability(const RecourseMdp& mdp, const Policy& policy,
                    double tolerance) {
  const std::size_t n = mdp.num_states();
  if (mdp.is_goal(mdp.initial())) return 1.0;
  const std::vector<bool> reachable = policy_reachable(mdp, policy);
  std::vector<bool> goals(n);
  for (std::size_t s = 0; s < n; ++s) goals[s] = mdp.is_goal(s);
  const std::vector<bool> live = can_reach(mdp, policy, reachable, goals);
  if (!live[mdp.initial()]) return 0.0;

  std::vector<double> p(n, 0.0);
  std::vector<std::size_t> transient;
  for (std::size_t s = 0; s < n; ++s) {
    if (!reachable[s] || !live[s]) continue;
    if (mdp.is_goal(s)) {
      p[s] = 1.0;
    } else {
      transient.push_back(s);
    }
  }
  // Least fixed point by Gauss-Seidel sweeps from zero. Every transient state
  // reaches a goal with positive probability, so the iteration contracts.
  const double stop = tolerance * 1e-3;
  for (std::size_t sweep = 0; sweep < 10000000; ++sweep) {
    double change = 0.0;
    for (std::size_t s : transient) {
      double sum = 0.0;
      for (const Transition& t : mdp.transitions(s, *policy.choice[s])) {
        sum += t.probability * p[t.next];
      }
      change = std::max(change, std::abs(sum - p[s]));
      p[s] = sum;
    }
    if (change <= stop) break;
  }
  return std::clamp(p[mdp.initial()], 0.0, 1.0);
}

PolicyCost policy_cost(const RecourseMdp& mdp, const Policy& policy,
                       double tolerance) {
  const std::size_t n = mdp.num_states();
  if (mdp.is_terminal(mdp.initial())) return {0.0, true};
  const std::vector<bool> reachable = policy_reachable(mdp, policy);
  std::vector<bool> terminal(n);
  for (std::size_t s = 0; s < n; ++s) {
    terminal[s] = mdp.is_terminal(s);
    if (reachable[s] && !terminal[s] && !policy.defined_at(s)) {
      throw_invalid("policy is undefined at reachable state " +
                    mdp.state_key(s));
    }
    if (reachable[s] && !terminal[s] &&
        !mdp.enabled(s, *policy.choice[s])) {
      throw_invalid("policy picks a disabled action at state " +
                    mdp.state_key(s));
    }
  }
  const std::vector<bool> absorbed = can_reach(mdp, policy, reachable, terminal);
  std::vector<std::size_t> transient;
  for (std::size_t s = 0; s < n; ++s) {
    if (!reachable[s] || terminal[s]) continue;
    if (!absorbed[s]) {
      return {std::numeric_limits<double>::infinity(), false};
    }
    transient.push_back(s);
  }

  std::vector<double> cost(n, 0.0);
  for (std::size_t sweep = 0; sweep < 10000000; ++sweep) {
    double change = 0.0;
    for (std::size_t s : transient) {
      const std::size_t a = *policy.choice[s];
      double sum = mdp.action_cost(a);
      for (const Transition& t : mdp.transitions(s, a)) {
        sum += t.probability * cost[t.next];
      }
      change = std::max(change,
                        std::abs(sum - cost[s]) / std::max(1.0, std::abs(sum)));
      cost[s] = sum;
    }
    if (change <= tolerance * 1e-3) break;
  }
  return {cost[mdp.initial()], true};
}

std::vector<TrajectoryStep> extract_plan(const RecourseMdp& mdp,
                                         const Policy& policy,
                                         std::size_t max_steps) {
  std::vector<TrajectoryStep> plan;
  std::vector<bool> visited(mdp.num_states(), false);
  std::size_t s = mdp.initial();
  while (plan.size() < max_steps) {
    if (mdp.is_terminal(s) || !policy.defined_at(s)) break;
    visited[s] = true;
    const std::size_t a = *policy.choice[s];
    const auto row = mdp.transitions(s, a);
    if (row.empty()) break;
    const Transition* likely = &row.front();
    for (const Transition& t : row) {
      if (t.probability > likely->probability) likely = &t;
    }
    plan.push_back({s, a, likely->next});
    if (visited[likely->next]) break;
    s = likely->next;
  }
  return plan;
}

}  // namespace recourse

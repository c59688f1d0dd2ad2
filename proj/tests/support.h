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

// Random problem generators and brute-force oracles shared by the unit
// tests and the acceptance binary. Nothing here calls the search or solver
// code it is used to check.

#ifndef RECOURSE_TESTS_SUPPORT_H_
#define RECOURSE_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "recourse/counterfactual.h"
#include "recourse/model.h"
#include "recourse/planner.h"
#include "recourse/schema.h"

namespace recourse::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

struct ProblemShape {
  std::size_t min_features = 2;
  std::size_t max_features = 6;
  std::size_t max_points = 11;
  // At most this many features are mutable; the rest become immutable.
  std::size_t max_mutable = 6;
  bool allow_conditions = true;
  bool allow_excluded = true;
};

struct Problem {
  std::shared_ptr<const FeatureSchema> schema;
  std::shared_ptr<const LinearModel> model;
  MadWeights weights;
  FeatureVector x;
};

inline FeatureSchema random_schema(Rng& rng, const ProblemShape& shape) {
  const std::size_t n = pick(rng, shape.min_features, shape.max_features);
  std::vector<FeatureSpec> specs;
  std::size_t mutable_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureSpec spec;
    spec.name = "f" + std::to_string(i);
    const std::size_t points = pick(rng, 2, shape.max_points);
    switch (pick(rng, 0, 2)) {
      case 0: {
        static constexpr double kSteps[] = {0.5, 1.0, 2.5};
        spec.kind = FeatureKind::kContinuous;
        spec.step = kSteps[pick(rng, 0, 2)];
        spec.lo = std::round(uniform(rng, -5.0, 5.0));
        spec.hi = spec.lo + spec.step * static_cast<double>(points - 1);
        break;
      }
      case 1: {
        spec.kind = FeatureKind::kOrdinal;
        double level = std::round(uniform(rng, -3.0, 3.0));
        for (std::size_t k = 0; k < points; ++k) {
          spec.levels.push_back(level);
          level += static_cast<double>(pick(rng, 1, 3));
        }
        spec.lo = spec.levels.front();
        spec.hi = spec.levels.back();
        break;
      }
      default:
        spec.kind = FeatureKind::kCategorical;
        for (std::size_t k = 0; k < std::min<std::size_t>(points, 4); ++k) {
          spec.labels.push_back("c" + std::to_string(k));
        }
        break;
    }
    const double roll = uniform(rng, 0.0, 1.0);
    if (mutable_count >= shape.max_mutable || roll < 0.2) {
      spec.mutability = Mutability::kImmutable;
    } else if (shape.allow_conditions && i > 0 && roll < 0.3 &&
               specs.front().kind != FeatureKind::kCategorical) {
      spec.mutability = Mutability::kConditionallyMutable;
      const FeatureSpec& first = specs.front();
      spec.condition.push_back(
          {0, Comparison::kGreaterEqual, 0.5 * (first.lo + first.hi)});
      ++mutable_count;
    } else {
      ++mutable_count;
    }
    if (spec.kind != FeatureKind::kCategorical) {
      const double d = uniform(rng, 0.0, 1.0);
      if (d < 0.15) spec.direction = Direction::kIncreaseOnly;
      else if (d < 0.3) spec.direction = Direction::kDecreaseOnly;
    }
    specs.push_back(std::move(spec));
  }
  return FeatureSchema(std::move(specs));
}

inline FeatureVector random_point(Rng& rng, const FeatureSchema& schema) {
  std::vector<double> values;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto grid = schema.grid_values(i);
    values.push_back(grid[pick(rng, 0, grid.size() - 1)]);
  }
  return FeatureVector(std::move(values));
}

inline std::shared_ptr<const LinearModel> random_model(
    Rng& rng, std::shared_ptr<const FeatureSchema> schema) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> coefficients(schema->encoded_width());
  for (double& w : coefficients) w = normal(rng);
  return std::make_shared<LinearModel>(schema, std::move(coefficients),
                                       normal(rng));
}

inline MadWeights random_weights(Rng& rng, const FeatureSchema& schema,
                                 bool allow_excluded) {
  std::vector<double> mad(schema.size());
  for (double& m : mad) {
    m = allow_excluded && coin(rng, 0.1) ? 0.0 : uniform(rng, 0.25, 4.0);
  }
  return MadWeights::from_mad(schema, std::move(mad));
}

inline Problem random_problem(Rng& rng, const ProblemShape& shape) {
  Problem p;
  p.schema = std::make_shared<FeatureSchema>(random_schema(rng, shape));
  p.model = random_model(rng, p.schema);
  p.weights = random_weights(rng, *p.schema, shape.allow_excluded);
  p.x = random_point(rng, *p.schema);
  return p;
}

// Logistic decision computed from the raw coefficient layout.
inline Label reference_label(const LinearModel& model, const FeatureVector& x) {
  const FeatureSchema& schema = model.schema();
  const auto w = model.coefficients();
  double z = model.bias();
  std::size_t column = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].kind == FeatureKind::kCategorical) {
      z += w[column + static_cast<std::size_t>(x[i])];
      column += schema[i].num_categories();
    } else {
      z += w[column++] * x[i];
    }
  }
  const double p = 1.0 / (1.0 + std::exp(-z));
  return p >= model.threshold() ? Label::kPositive : Label::kNegative;
}

inline double reference_distance(const FeatureSchema& schema,
                                 const std::vector<double>& mad,
                                 const FeatureVector& a,
                                 const FeatureVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].kind == FeatureKind::kCategorical) {
      d += a[i] == b[i] ? 0.0 : 1.0;
    } else if (mad[i] > 0.0) {
      d += std::fabs(a[i] - b[i]) / mad[i];
    }
  }
  return d;
}

inline bool may_change(const FeatureSchema& schema, std::size_t i,
                       const FeatureVector& x) {
  const FeatureSpec& spec = schema[i];
  if (spec.mutability == Mutability::kImmutable) return false;
  if (spec.mutability == Mutability::kConditionallyMutable) {
    for (const Clause& c : spec.condition) {
      if (c.op == Comparison::kGreaterEqual && !(x[c.feature] >= c.value)) {
        return false;
      }
    }
  }
  return true;
}

inline bool direction_ok(const FeatureSpec& spec, double from, double to) {
  if (spec.direction == Direction::kIncreaseOnly) return to >= from;
  if (spec.direction == Direction::kDecreaseOnly) return to <= from;
  return true;
}

// Enumerates the full product of per-feature candidates and returns the
// smallest distance of a point with the desired label.
inline std::optional<double> brute_force_nearest(const Problem& p,
                                                 Label desired,
                                                 const SearchGrid& grid) {
  const FeatureSchema& schema = *p.schema;
  std::vector<std::vector<double>> choices(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    choices[i].push_back(p.x[i]);
    if (p.weights.excluded[i] || !may_change(schema, i, p.x)) continue;
    for (double v : grid.values[i]) {
      if (v != p.x[i] && direction_ok(schema[i], p.x[i], v)) {
        choices[i].push_back(v);
      }
    }
  }
  std::optional<double> best;
  std::vector<std::size_t> index(schema.size(), 0);
  std::vector<double> values(schema.size());
  while (true) {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      values[i] = choices[i][index[i]];
    }
    FeatureVector c(values);
    if (reference_label(*p.model, c) == desired) {
      const double d = reference_distance(schema, p.weights.mad, p.x, c);
      if (!best || d < *best) best = d;
    }
    std::size_t k = 0;
    while (k < schema.size() && ++index[k] == choices[k].size()) {
      index[k++] = 0;
    }
    if (k == schema.size()) break;
  }
  return best;
}

// Exhaustive minimum-cost flipset over at most one delta per entry feature.
inline std::optional<double> brute_force_flipset(const Problem& p,
                                                 Label desired,
                                                 const ActionGrid& grid,
                                                 double budget) {
  const FeatureSchema& schema = *p.schema;
  std::vector<std::vector<std::pair<double, double>>> choices(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) choices[i].push_back({0, 0});
  for (const ActionGridEntry& e : grid) {
    if (!may_change(schema, e.feature, p.x)) continue;
    for (double delta : e.deltas) {
      const double v = p.x[e.feature] + delta;
      if (delta != 0.0 && schema.value_admissible(e.feature, v)) {
        choices[e.feature].push_back({delta, e.unit_cost * std::fabs(delta)});
      }
    }
  }
  std::optional<double> best;
  std::vector<std::size_t> index(schema.size(), 0);
  while (true) {
    std::vector<double> values(p.x.values().begin(), p.x.values().end());
    double cost = 0.0;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      values[i] += choices[i][index[i]].first;
      cost += choices[i][index[i]].second;
    }
    if (cost <= budget &&
        reference_label(*p.model, FeatureVector(values)) == desired) {
      if (!best || cost < *best) best = cost;
    }
    std::size_t k = 0;
    while (k < schema.size() && ++index[k] == choices[k].size()) {
      index[k++] = 0;
    }
    if (k == schema.size()) break;
  }
  return best;
}

// Deltas that move each mutable numeric feature to a few other grid values.
inline ActionGrid random_action_grid(Rng& rng, const Problem& p) {
  const FeatureSchema& schema = *p.schema;
  ActionGrid grid;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const FeatureSpec& spec = schema[i];
    if (spec.mutability == Mutability::kImmutable ||
        spec.kind == FeatureKind::kCategorical) {
      continue;
    }
    ActionGridEntry entry;
    entry.feature = i;
    entry.unit_cost = uniform(rng, 0.2, 3.0);
    for (double v : schema.grid_values(i)) {
      const double delta = v - p.x[i];
      if (delta != 0.0 && direction_ok(spec, p.x[i], v) && coin(rng, 0.7)) {
        entry.deltas.push_back(delta);
      }
    }
    if (!entry.deltas.empty()) grid.push_back(std::move(entry));
  }
  return grid;
}

struct MdpShape {
  std::size_t min_states = 5;
  std::size_t max_states = 30;
  std::size_t max_actions = 4;
  bool deterministic = false;
  // Transitions only go to higher-numbered states.
  bool acyclic = false;
  // Every action of an MDP costs the same.
  bool uniform_cost = false;
  // Action 0 always moves strictly towards the last (goal) state.
  bool goal_reachable = false;
  double discount = 0.95;
};

inline RecourseMdp random_mdp(Rng& rng, const MdpShape& shape) {
  const std::size_t n = pick(rng, shape.min_states, shape.max_states);
  const std::size_t m = pick(rng, 2, shape.max_actions);
  std::vector<double> costs(m);
  const double base = uniform(rng, 0.5, 3.0);
  for (double& c : costs) {
    c = shape.uniform_cost ? base : std::round(uniform(rng, 0.5, 5.0) * 100) / 100;
  }
  std::vector<bool> goal(n, false);
  goal[n - 1] = true;
  if (!shape.goal_reachable && n > 6 && coin(rng, 0.5)) goal[n - 2] = true;

  auto successor = [&](std::size_t s) {
    if (shape.acyclic) return pick(rng, s + 1, n - 1);
    std::size_t t = pick(rng, 0, n - 1);
    return t;
  };
  std::vector<std::vector<std::vector<Transition>>> transitions(
      n, std::vector<std::vector<Transition>>(m));
  for (std::size_t s = 0; s < n; ++s) {
    if (goal[s]) continue;
    for (std::size_t a = 0; a < m; ++a) {
      if (shape.goal_reachable && a == 0) {
        transitions[s][a].push_back({pick(rng, s + 1, n - 1), 1.0});
        continue;
      }
      if (s != 0 && coin(rng, 0.2)) continue;
      std::map<std::size_t, double> outcomes;
      if (shape.deterministic) {
        outcomes[successor(s)] = 1.0;
      } else {
        const std::size_t k = pick(rng, 1, 3);
        std::vector<double> raw(k);
        double total = 0.0;
        for (double& r : raw) total += (r = uniform(rng, 0.1, 1.0));
        for (std::size_t j = 0; j < k; ++j) {
          outcomes[successor(s)] += raw[j] / total;
        }
      }
      for (auto [t, prob] : outcomes) transitions[s][a].push_back({t, prob});
    }
  }
  double max_cost = *std::max_element(costs.begin(), costs.end());
  return RecourseMdp(std::move(costs), std::move(transitions), std::move(goal),
                     0, shape.discount, 10.0 * max_cost);
}

// Depth-limited expectimax with value 0 at terminals and at the horizon.
class Expectimax {
 public:
  Expectimax(const RecourseMdp& mdp, std::size_t depth)
      : mdp_(mdp), memo_(depth + 1, std::vector<double>(mdp.num_states())),
        done_(depth + 1, std::vector<bool>(mdp.num_states(), false)) {}

  double value(std::size_t s, std::size_t depth) {
    if (depth == 0 || mdp_.is_goal(s)) return 0.0;
    if (done_[depth][s]) return memo_[depth][s];
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t a = 0; a < mdp_.num_actions(); ++a) {
      if (!mdp_.enabled(s, a)) continue;
      any = true;
      double q = 0.0;
      for (const Transition& t : mdp_.transitions(s, a)) {
        q += t.probability * (mdp_.reward(a, t.next) +
                              mdp_.discount() * value(t.next, depth - 1));
      }
      best = std::max(best, q);
    }
    done_[depth][s] = true;
    return memo_[depth][s] = any ? best : 0.0;
  }

 private:
  const RecourseMdp& mdp_;
  std::vector<std::vector<double>> memo_;
  std::vector<std::vector<bool>> done_;
};

// Cheapest undiscounted cost-to-goal of a deterministic MDP, by uniform-cost
// search over reversed edges from the goal states.
inline std::vector<double> uniform_cost_to_goal(const RecourseMdp& mdp) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = mdp.num_states();
  std::vector<std::vector<std::pair<std::size_t, double>>> reverse(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      for (const Transition& t : mdp.transitions(s, a)) {
        reverse[t.next].push_back({s, mdp.action_cost(a)});
      }
    }
  }
  std::vector<double> dist(n, inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    if (mdp.is_goal(s)) frontier.push({dist[s] = 0.0, s});
  }
  while (!frontier.empty()) {
    auto [d, s] = frontier.top();
    frontier.pop();
    if (d > dist[s]) continue;
    for (auto [prev, cost] : reverse[s]) {
      if (mdp.is_goal(prev)) continue;
      if (d + cost < dist[prev]) frontier.push({dist[prev] = d + cost, prev});
    }
  }
  return dist;
}

// Lowest-index action whose successor lies on a cheapest path to a goal.
inline std::optional<std::size_t> uniform_cost_choice(
    const RecourseMdp& mdp, const std::vector<double>& dist, std::size_t s) {
  for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
    if (!mdp.enabled(s, a)) continue;
    const std::size_t next = mdp.transitions(s, a).front().next;
    if (std::fabs(mdp.action_cost(a) + dist[next] - dist[s]) <= 1e-9) return a;
  }
  return std::nullopt;
}

struct RolloutStats {
  double goal_rate = 0.0;
  double mean_cost = 0.0;
};

// Monte Carlo estimate of goal probability and undiscounted cost.
inline RolloutStats rollouts(const RecourseMdp& mdp, const Policy& policy,
                             std::size_t count, std::uint64_t seed,
                             std::size_t max_steps) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t goals = 0;
  double cost = 0.0;
  for (std::size_t r = 0; r < count; ++r) {
    std::size_t s = mdp.initial();
    for (std::size_t step = 0; step < max_steps; ++step) {
      if (mdp.is_goal(s)) break;
      if (!policy.defined_at(s)) break;
      const std::size_t a = *policy.choice[s];
      cost += mdp.action_cost(a);
      double draw = u(rng);
      const auto outcomes = mdp.transitions(s, a);
      std::size_t next = outcomes.back().next;
      for (const Transition& t : outcomes) {
        if ((draw -= t.probability) < 0.0) {
          next = t.next;
          break;
        }
      }
      s = next;
    }
    if (mdp.is_goal(s)) ++goals;
  }
  return {static_cast<double>(goals) / static_cast<double>(count),
          cost / static_cast<double>(count)};
}

}  // namespace recourse::testing

#endif  // RECOURSE_TESTS_SUPPORT_H_

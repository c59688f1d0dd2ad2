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

#include "recourse/counterfactual.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "recourse/error.h"

namespace recourse {
namespace {

struct Option {
  double value;
  double cost;
  // Signed logit change towards the desired label.
  double gain;
};

// One feature that may move, with its alternatives sorted by cost.
struct Slot {
  std::size_t feature;
  std::vector<Option> options;
};

struct Best {
  FeatureVector target;
  double cost = 0.0;
  std::vector<std::size_t> changed;
};

// Strict total order on candidates: cost, number of changes, changed
// indices, then target values.
bool better(const FeatureVector& target, double cost,
            const std::vector<std::size_t>& changed, const Best& best) {
  if (cost != best.cost) return cost < best.cost;
  if (changed.size() != best.changed.size()) {
    return changed.size() < best.changed.size();
  }
  if (changed != best.changed) return changed < best.changed;
  return std::lexicographical_compare(
      target.values().begin(), target.values().end(),
      best.target.values().begin(), best.target.values().end());
}

bool contains_all(const std::vector<std::size_t>& set,
                  const std::vector<std::size_t>& subset) {
  return std::includes(set.begin(), set.end(), subset.begin(), subset.end());
}

// Exact branch and bound over "keep or pick one option" per slot. The
// model is linear, so the label constraint is a knapsack-style bound on the
// summed gains; labels are still confirmed with classify at every leaf.
class SeparableSearch {
 public:
  SeparableSearch(const LinearModel& model, const FeatureVector& x,
                  Label desired, std::vector<Slot> slots, double budget,
                  const std::vector<std::vector<std::size_t>>& forbidden)
      : model_(model),
        desired_(desired),
        slots_(std::move(slots)),
        budget_(budget),
        forbidden_(forbidden),
        target_(x) {
    const double threshold = model.threshold();
    const double z_threshold = std::log(threshold / (1.0 - threshold));
    const double z = model.logit(x);
    need_ = desired == Label::kPositive ? z_threshold - z : z - z_threshold;

    const std::size_t m = slots_.size();
    max_gain_rest_.assign(m + 1, 0.0);
    max_efficiency_rest_.assign(m + 1, 0.0);
    double magnitude = std::abs(need_);
    for (std::size_t k = m; k-- > 0;) {
      double max_gain = 0.0;
      double max_efficiency = 0.0;
      for (const Option& option : slots_[k].options) {
        max_gain = std::max(max_gain, option.gain);
        magnitude += std::abs(option.gain);
        if (option.gain > 0.0) {
          max_efficiency =
              option.cost > 0.0
                  ? std::max(max_efficiency, option.gain / option.cost)
                  : std::numeric_limits<double>::infinity();
        }
      }
      max_gain_rest_[k] = max_gain_rest_[k + 1] + max_gain;
      max_efficiency_rest_[k] =
          std::max(max_efficiency_rest_[k + 1], max_efficiency);
    }
    slack_ = 1e-9 * (1.0 + magnitude);
    chosen_cost_.assign(model.schema().size(), 0.0);
  }

  std::optional<Best> run() {
    descend(0, 0.0, 0.0);
    return best_;
  }

 private:
  double cost_tolerance() const {
    return 1e-9 * std::max(1.0, best_ ? best_->cost : 0.0);
  }

  void descend(std::size_t k, double cost, double gain) {
    if (gain + max_gain_rest_[k] < need_ - slack_) return;
    if (best_) {
      const double remaining = need_ - gain - slack_;
      double lower_bound = 0.0;
      if (remaining > 0.0 && max_efficiency_rest_[k] > 0.0) {
        lower_bound = remaining / max_efficiency_rest_[k];
      }
      if (cost + lower_bound > best_->cost + cost_tolerance()) return;
    }
    if (k == slots_.size()) {
      visit_leaf();
      return;
    }
    descend(k + 1, cost, gain);

    const Slot& slot = slots_[k];
    const double original = target_[slot.feature];
    changed_.push_back(slot.feature);
    for (const Option& option : slot.options) {
      const double next_cost = cost + option.cost;
      if (next_cost > budget_ * (1.0 + 1e-12) + 1e-12) break;
      if (best_ && next_cost > best_->cost + cost_tolerance()) break;
      target_[slot.feature] = option.value;
      chosen_cost_[slot.feature] = option.cost;
      descend(k + 1, next_cost, gain + option.gain);
    }
    chosen_cost_[slot.feature] = 0.0;
    target_[slot.feature] = original;
    changed_.pop_back();
  }

  void visit_leaf() {
    if (classify(model_, target_) != desired_) return;
    for (const auto& set : forbidden_) {
      if (contains_all(changed_, set)) return;
    }
    // Canonical cost: summed in schema order.
    double cost = 0.0;
    for (double c : chosen_cost_) cost += c;
    if (cost > budget_ * (1.0 + 1e-12) + 1e-12) return;
    if (!best_ || better(target_, cost, changed_, *best_)) {
      best_ = Best{target_, cost, changed_};
    }
  }

  const LinearModel& model_;
  Label desired_;
  std::vector<Slot> slots_;
  double budget_;
  const std::vector<std::vector<std::size_t>>& forbidden_;

  double need_ = 0.0;
  double slack_ = 0.0;
  std::vector<double> max_gain_rest_;
  std::vector<double> max_efficiency_rest_;

  FeatureVector target_;
  std::vector<std::size_t> changed_;
  std::vector<double> chosen_cost_;
  std::optional<Best> best_;
};

double signed_gain(const LinearModel& model, Label desired,
                   std::size_t feature, double from, double to) {
  const double delta =
      model.contribution(feature, to) - model.contribution(feature, from);
  return desired == Label::kPositive ? delta : -delta;
}

bool direction_allows(const FeatureSpec& spec, double from, double to) {
  switch (spec.direction) {
    case Direction::kFree:
      return true;
    case Direction::kIncreaseOnly:
      return to >= from;
    case Direction::kDecreaseOnly:
      return to <= from;
  }
  return false;
}

void sort_options(std::vector<Option>& options) {
  std::sort(options.begin(), options.end(),
            [](const Option& a, const Option& b) {
              if (a.cost != b.cost) return a.cost < b.cost;
              return a.value < b.value;
            });
}

void check_searchable(const LinearModel& model, const FeatureVector& x) {
  const FeatureSchema& schema = model.schema();
  if (x.size() != schema.size()) {
    throw_invalid("feature vector does not match the model schema");
  }
  if (!schema.has_mutable_feature()) {
    throw_infeasible("no recourse possible: every feature is immutable");
  }
}

std::vector<Slot> counterfactual_slots(const LinearModel& model,
                                       const FeatureVector& x, Label desired,
                                       const SearchGrid& grid,
                                       const MadWeights& weights) {
  const FeatureSchema& schema = model.schema();
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (grid.values[i].empty() || weights.excluded[i]) continue;
    if (!schema.is_mutable_for(i, x)) continue;
    const FeatureSpec& spec = schema[i];
    Slot slot{i, {}};
    for (double value : grid.values[i]) {
      if (value == x[i] || !direction_allows(spec, x[i], value)) continue;
      const double cost = spec.kind == FeatureKind::kCategorical
                              ? weights.weight[i]
                              : weights.weight[i] * std::abs(x[i] - value);
      slot.options.push_back(
          {value, cost, signed_gain(model, desired, i, x[i], value)});
    }
    sort_options(slot.options);
    slot.options.erase(
        std::unique(slot.options.begin(), slot.options.end(),
                    [](const Option& a, const Option& b) {
                      return a.value == b.value;
                    }),
        slot.options.end());
    if (!slot.options.empty()) slots.push_back(std::move(slot));
  }
  return slots;
}

std::optional<Counterfactual> nearest_with_forbidden(
    const LinearModel& model, const FeatureVector& x, Label desired,
    const SearchGrid& grid, const MadWeights& weights,
    const std::vector<std::vector<std::size_t>>& forbidden) {
  SeparableSearch search(
      model, x, desired, counterfactual_slots(model, x, desired, grid, weights),
      std::numeric_limits<double>::infinity(), forbidden);
  auto best = search.run();
  if (!best) return std::nullopt;
  Counterfactual result;
  result.target = std::move(best->target);
  result.changed = std::move(best->changed);
  result.distance = weighted_distance(model.schema(), x, result.target, weights);
  result.achieved = desired;
  return result;
}

void check_grid(const LinearModel& model, const SearchGrid& grid,
                const MadWeights& weights) {
  const FeatureSchema& schema = model.schema();
  if (grid.values.size() != schema.size()) {
    throw_invalid("search grid does not match the schema");
  }
  if (weights.size() != schema.size() ||
      weights.excluded.size() != schema.size()) {
    throw_invalid("distance weights do not match the schema");
  }
  if (grid.empty()) throw_invalid("empty search grid");
  grid.validate(schema);
}

}  // namespace

SearchGrid SearchGrid::from_schema(const FeatureSchema& schema) {
  SearchGrid grid;
  grid.values.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].mutability != Mutability::kImmutable) {
      grid.values[i] = schema.grid_values(i);
    }
  }
  return grid;
}

SearchGrid SearchGrid::for_features(const FeatureSchema& schema,
                                    std::span<const std::size_t> features,
                                    std::span<const double> steps) {
  if (!steps.empty() && steps.size() != features.size()) {
    throw_invalid("grid steps must parallel the grid features");
  }
  SearchGrid grid;
  grid.values.resize(schema.size());
  for (std::size_t k = 0; k < features.size(); ++k) {
    const std::size_t i = features[k];
    if (i >= schema.size()) throw_invalid("grid feature out of range");
    if (!steps.empty() && !(steps[k] > 0.0)) {
      throw_invalid("grid step for '" + schema[i].name + "' must be > 0");
    }
    grid.values[i] = steps.empty() ? schema.grid_values(i)
                                   : schema.grid_values(i, steps[k]);
  }
  return grid;
}

bool SearchGrid::empty() const {
  return std::all_of(values.begin(), values.end(),
                     [](const auto& list) { return list.empty(); });
}

void SearchGrid::validate(const FeatureSchema& schema) const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (double value : values[i]) {
      if (!schema.value_admissible(i, value)) {
        throw_invalid("grid value for '" + schema[i].name +
                      "' is outside its admissible set");
      }
    }
  }
}

double weighted_distance(const FeatureSchema& schema, const FeatureVector& x,
                         const FeatureVector& c, const MadWeights& weights) {
  if (x.size() != schema.size() || c.size() != schema.size() ||
      weights.size() != schema.size()) {
    throw_invalid("distance operands do not match the schema");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (weights.excluded[i]) continue;
    if (schema[i].kind == FeatureKind::kCategorical) {
      if (x[i] != c[i]) total += weights.weight[i];
    } else {
      total += weights.weight[i] * std::abs(x[i] - c[i]);
    }
  }
  return total;
}

std::optional<Counterfactual> nearest_counterfactual(
    const LinearModel& model, const FeatureVector& x, Label desired,
    const SearchGrid& grid, const MadWeights& weights) {
  check_searchable(model, x);
  check_grid(model, grid, weights);
  if (classify(model, x) == desired) {
    return Counterfactual{x, 0.0, {}, desired};
  }
  return nearest_with_forbidden(model, x, desired, grid, weights, {});
}

std::vector<Counterfactual> diverse_counterfactuals(
    const LinearModel& model, const FeatureVector& x, Label desired,
    const SearchGrid& grid, const MadWeights& weights, std::size_t k) {
  if (k == 0) throw_invalid("k must be at least 1");
  check_searchable(model, x);
  check_grid(model, grid, weights);
  if (classify(model, x) == desired) {
    return {Counterfactual{x, 0.0, {}, desired}};
  }
  std::vector<Counterfactual> results;
  std::vector<std::vector<std::size_t>> forbidden;
  while (results.size() < k) {
    auto next = nearest_with_forbidden(model, x, desired, grid, weights,
                                       forbidden);
    if (!next) break;
    forbidden.push_back(next->changed);
    results.push_back(std::move(*next));
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const Counterfactual& a, const Counterfactual& b) {
                     return a.distance < b.distance;
                   });
  return results;
}

std::optional<FlipSet> min_cost_flipset(const LinearModel& model,
                                        const FeatureVector& x, Label desired,
                                        const ActionGrid& action_grid,
                                        double budget) {
  const FeatureSchema& schema = model.schema();
  check_searchable(model, x);
  if (action_grid.empty()) throw_invalid("empty action grid");
  if (std::isnan(budget) || budget < 0.0) {
    throw_invalid("budget must be nonnegative");
  }

  std::vector<std::vector<Option>> per_feature(schema.size());
  for (const ActionGridEntry& entry : action_grid) {
    if (entry.feature >= schema.size()) {
      throw_invalid("action grid feature out of range");
    }
    const FeatureSpec& spec = schema[entry.feature];
    if (spec.mutability == Mutability::kImmutable) {
      throw_invalid("action grid changes immutable feature '" + spec.name +
                    "'");
    }
    if (!(entry.unit_cost >= 0.0) || !std::isfinite(entry.unit_cost)) {
      throw_invalid("unit cost for '" + spec.name + "' must be >= 0");
    }
    for (double delta : entry.deltas) {
      if ((spec.direction == Direction::kIncreaseOnly && delta < 0.0) ||
          (spec.direction == Direction::kDecreaseOnly && delta > 0.0)) {
        throw_invalid("delta on '" + spec.name +
                      "' violates its direction constraint");
      }
    }
    if (!holds_all(entry.condition, x)) continue;
    if (!schema.is_mutable_for(entry.feature, x)) continue;
    const std::size_t i = entry.feature;
    for (double delta : entry.deltas) {
      if (delta == 0.0) continue;
      const double value = x[i] + delta;
      if (!schema.value_admissible(i, value)) continue;
      per_feature[i].push_back({value, entry.unit_cost * std::abs(delta),
                                signed_gain(model, desired, i, x[i], value)});
    }
  }

  if (classify(model, x) == desired) return FlipSet{{}, 0.0, x};

  std::vector<Slot> slots;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (per_feature[i].empty()) continue;
    sort_options(per_feature[i]);
    // Identical results reached by several entries keep the cheapest.
    std::vector<Option> unique;
    for (const Option& option : per_feature[i]) {
      if (std::none_of(unique.begin(), unique.end(), [&](const Option& o) {
            return o.value == option.value;
          })) {
        unique.push_back(option);
      }
    }
    slots.push_back({i, std::move(unique)});
  }

  static const std::vector<std::vector<std::size_t>> kNone;
  SeparableSearch search(model, x, desired, std::move(slots), budget, kNone);
  auto best = search.run();
  if (!best) return std::nullopt;
  FlipSet flipset;
  for (std::size_t i : best->changed) {
    flipset.deltas.emplace_back(i, best->target[i] - x[i]);
  }
  flipset.total_cost = best->cost;
  flipset.result = std::move(best->target);
  return flipset;
}

}  // namespace recourse

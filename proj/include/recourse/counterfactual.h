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

#ifndef RECOURSE_COUNTERFACTUAL_H_
#define RECOURSE_COUNTERFACTUAL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "recourse/model.h"
#include "recourse/schema.h"

namespace recourse {

// Candidate values per feature, in schema order. An empty list pins the
// feature to the instance's own value.
struct SearchGrid {
  std::vector<std::vector<double>> values;

  // Every feature that is not immutable, on its schema grid.
  static SearchGrid from_schema(const FeatureSchema& schema);
  // Only `features`, on their schema grids; `steps` (parallel to
  // `features`, may be empty) overrides continuous step sizes.
  static SearchGrid for_features(const FeatureSchema& schema,
                                 std::span<const std::size_t> features,
                                 std::span<const double> steps = {});

  bool empty() const;
  // Throws kInvalidInput if a value is not admissible for its feature.
  void validate(const FeatureSchema& schema) const;
};

struct Counterfactual {
  FeatureVector target;
  double distance = 0.0;
  std::vector<std::size_t> changed;
  Label achieved = Label::kPositive;
};

struct FlipSet {
  // (feature, signed change), sorted by feature.
  std::vector<std::pair<std::size_t, double>> deltas;
  double total_cost = 0.0;
  FeatureVector result;
};

// Allowed changes for one feature; each delta costs unit_cost * |delta|.
struct ActionGridEntry {
  std::size_t feature = 0;
  std::vector<double> deltas;
  double unit_cost = 1.0;
  // Entry applies only when all clauses hold for the instance.
  std::vector<Clause> condition;
};

using ActionGrid = std::vector<ActionGridEntry>;

// Sum over non-excluded features of weight * |x_i - c_i|; categorical
// features contribute weight * [x_i != c_i]. Throws kInvalidInput when the
// vectors or weights do not match the schema.
double weighted_distance(const FeatureSchema& schema, const FeatureVector& x,
                         const FeatureVector& c, const MadWeights& weights);

// Grid point with the desired label closest to `x`. Ties go to fewer
// changed features, then the lexicographically smaller changed-index list,
// then the lexicographically smaller value vector. Immutable features (and
// conditionally-mutable ones whose condition fails) stay at x; directional
// features only move in their allowed direction.
//
// Throws kInfeasible when the schema has no mutable feature and
// kInvalidInput for an empty grid.
std::optional<Counterfactual> nearest_counterfactual(
    const LinearModel& model, const FeatureVector& x, Label desired,
    const SearchGrid& grid, const MadWeights& weights);

// Repeated nearest search where each round rejects candidates whose changed
// set contains the changed set of an earlier result. Sorted by distance.
std::vector<Counterfactual> diverse_counterfactuals(
    const LinearModel& model, const FeatureVector& x, Label desired,
    const SearchGrid& grid, const MadWeights& weights, std::size_t k);

// Cheapest combination of at most one delta per feature whose result has the
// desired label, subject to total cost <= budget. Ties as in
// nearest_counterfactual. Throws kInvalidInput for an empty grid, deltas on
// immutable features or deltas against a feature's direction.
std::optional<FlipSet> min_cost_flipset(const LinearModel& model,
                                        const FeatureVector& x, Label desired,
                                        const ActionGrid& action_grid,
                                        double budget);

}  // namespace recourse

#endif  // RECOURSE_COUNTERFACTUAL_H_

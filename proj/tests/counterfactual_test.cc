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

#include <gtest/gtest.h>

#include <limits>
#include <memory>
#include <vector>

#include "recourse/counterfactual.h"
#include "recourse/error.h"
#include "recourse/model.h"

namespace recourse {
namespace {

// logit = 0.1 income - 0.2 debt - 5; age is immutable.
class LoanFixture : public ::testing::Test {
 protected:
  void SetUp() override { build(Direction::kFree); }

  void build(Direction debt_direction) {
    FeatureSpec income{.name = "income", .lo = 0, .hi = 100, .step = 10};
    FeatureSpec debt{.name = "debt", .lo = 0, .hi = 50, .step = 5};
    debt.direction = debt_direction;
    FeatureSpec age{.name = "age", .lo = 18, .hi = 90, .step = 1};
    age.mutability = Mutability::kImmutable;
    schema_ = std::make_shared<FeatureSchema>(
        std::vector<FeatureSpec>{income, debt, age});
    model_ = std::make_shared<LinearModel>(
        schema_, std::vector<double>{0.1, -0.2, 0.05}, -7.0);
    weights_ = MadWeights::from_mad(*schema_, {10, 10, 1});
    grid_ = SearchGrid::from_schema(*schema_);
  }

  const FeatureVector x_{std::vector<double>{30, 20, 40}};
  std::shared_ptr<FeatureSchema> schema_;
  std::shared_ptr<LinearModel> model_;
  MadWeights weights_;
  SearchGrid grid_;
};

TEST_F(LoanFixture, NearestMixesCheapestChanges) {
  ASSERT_EQ(classify(*model_, x_), Label::kNegative);
  auto c = nearest_counterfactual(*model_, x_, Label::kPositive, grid_, weights_);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->target, FeatureVector({50, 0, 40}));
  EXPECT_DOUBLE_EQ(c->distance, 4.0);
  EXPECT_EQ(c->changed, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(classify(*model_, c->target), Label::kPositive);
}

TEST_F(LoanFixture, DirectionConstraintsBindSearch) {
  build(Direction::kIncreaseOnly);
  auto c = nearest_counterfactual(*model_, x_, Label::kPositive, grid_, weights_);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->target, FeatureVector({90, 20, 40}));
  EXPECT_DOUBLE_EQ(c->distance, 6.0);
}

TEST_F(LoanFixture, AlreadyDesiredIsItsOwnCounterfactual) {
  auto c = nearest_counterfactual(*model_, x_, Label::kNegative, grid_, weights_);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->target, x_);
  EXPECT_DOUBLE_EQ(c->distance, 0.0);
  EXPECT_TRUE(c->changed.empty());
}

TEST_F(LoanFixture, UnreachableLabelReturnsNothing) {
  SearchGrid narrow = SearchGrid::for_features(*schema_, std::vector<std::size_t>{1});
  EXPECT_FALSE(nearest_counterfactual(*model_, x_, Label::kPositive, narrow,
                                      weights_)
                   .has_value());
}

TEST_F(LoanFixture, DiverseResultsNeverContainEarlierChangeSets) {
  auto results = diverse_counterfactuals(*model_, x_, Label::kPositive, grid_,
                                         weights_, 3);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].changed, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(results[1].changed, (std::vector<std::size_t>{0}));
  EXPECT_DOUBLE_EQ(results[1].distance, 6.0);
  EXPECT_THROW(diverse_counterfactuals(*model_, x_, Label::kPositive, grid_,
                                       weights_, 0),
               RecourseError);
}

TEST_F(LoanFixture, ExcludedFeaturesStayPut) {
  weights_ = MadWeights::from_mad(*schema_, {10, 0, 1});
  auto c = nearest_counterfactual(*model_, x_, Label::kPositive, grid_, weights_);
  ASSERT_TRUE(c.has_value());
  EXPECT_DOUBLE_EQ(c->target[1], 20);
}

TEST_F(LoanFixture, DistanceIsWeightedManhattan) {
  EXPECT_DOUBLE_EQ(
      weighted_distance(*schema_, x_, FeatureVector({50, 0, 41}), weights_),
      2.0 + 2.0 + 1.0);
  EXPECT_THROW(weighted_distance(*schema_, x_, FeatureVector({1}), weights_),
               RecourseError);
}

TEST_F(LoanFixture, FlipsetRespectsBudget) {
  ActionGrid grid = {{0, {10, 20, 30, 60}, 0.1, {}}, {1, {-10, -20}, 0.1, {}}};
  EXPECT_FALSE(
      min_cost_flipset(*model_, x_, Label::kPositive, grid, 3.9).has_value());
  auto fs = min_cost_flipset(*model_, x_, Label::kPositive, grid, 4.0);
  ASSERT_TRUE(fs.has_value());
  EXPECT_DOUBLE_EQ(fs->total_cost, 4.0);
  ASSERT_EQ(fs->deltas.size(), 2u);
  EXPECT_EQ(fs->deltas[0], (std::pair<std::size_t, double>{0, 20}));
  EXPECT_EQ(fs->deltas[1], (std::pair<std::size_t, double>{1, -20}));
  EXPECT_EQ(fs->result, FeatureVector({50, 0, 40}));
}

TEST_F(LoanFixture, FlipsetSkipsEntriesWhoseConditionFails) {
  ActionGrid grid = {{0, {60}, 0.1, {{2, Comparison::kGreater, 65}}}};
  EXPECT_FALSE(min_cost_flipset(*model_, x_, Label::kPositive, grid,
                                std::numeric_limits<double>::infinity())
                   .has_value());
}

TEST_F(LoanFixture, FlipsetRejectsIllegalGrids) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(min_cost_flipset(*model_, x_, Label::kPositive, {}, inf),
               RecourseError);
  ActionGrid immutable = {{2, {1}, 1.0, {}}};
  EXPECT_THROW(min_cost_flipset(*model_, x_, Label::kPositive, immutable, inf),
               RecourseError);
  build(Direction::kIncreaseOnly);
  ActionGrid against = {{1, {-5}, 1.0, {}}};
  EXPECT_THROW(min_cost_flipset(*model_, x_, Label::kPositive, against, inf),
               RecourseError);
  ActionGrid ok = {{0, {10}, 1.0, {}}};
  EXPECT_THROW(min_cost_flipset(*model_, x_, Label::kPositive, ok, -1.0),
               RecourseError);
}

TEST(Counterfactual, AllImmutableIsInfeasible) {
  FeatureSpec a{.name = "a", .lo = 0, .hi = 1, .step = 1};
  a.mutability = Mutability::kImmutable;
  auto schema = std::make_shared<FeatureSchema>(std::vector<FeatureSpec>{a});
  LinearModel model(schema, {1.0}, -5.0);
  SearchGrid grid;
  grid.values = {std::vector<double>{0, 1}};
  try {
    nearest_counterfactual(model, FeatureVector({0}), Label::kPositive, grid,
                           MadWeights::uniform(*schema));
    FAIL() << "expected an infeasible error";
  } catch (const RecourseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(Counterfactual, CategoricalChangeCostsOne) {
  FeatureSpec c{.name = "c", .kind = FeatureKind::kCategorical};
  c.labels = {"a", "b", "c"};
  auto schema = std::make_shared<FeatureSchema>(std::vector<FeatureSpec>{c});
  LinearModel model(schema, {0.0, -1.0, 1.0}, -0.5);
  auto result =
      nearest_counterfactual(model, FeatureVector({1}), Label::kPositive,
                             SearchGrid::from_schema(*schema),
                             MadWeights::uniform(*schema));
  ASSERT_TRUE(result.has_value());
  EXPECT_DOUBLE_EQ(result->target[0], 2);
  EXPECT_DOUBLE_EQ(result->distance, 1.0);
}

TEST(SearchGrid, OverridesAndValidation) {
  FeatureSpec x{.name = "x", .lo = 0, .hi = 10, .step = 5};
  FeatureSchema schema({x});
  SearchGrid grid = SearchGrid::for_features(schema, std::vector<std::size_t>{0},
                                             std::vector<double>{2.5});
  EXPECT_EQ(grid.values[0], (std::vector<double>{0, 2.5, 5, 7.5, 10}));
  EXPECT_THROW(SearchGrid::for_features(schema, std::vector<std::size_t>{0},
                                        std::vector<double>{0.0}),
               RecourseError);
  SearchGrid bad;
  bad.values = {std::vector<double>{11}};
  EXPECT_THROW(bad.validate(schema), RecourseError);
  SearchGrid none;
  none.values = {std::vector<double>{}};
  EXPECT_TRUE(none.empty());
}

}  // namespace
}  // namespace recourse
